"""Reference metrics built from Killing fields along an explicit geodesic.

* ``preset_round``: the unit sphere S^{2n-1} in C^n with the action
  ``Z -> e^{i theta} A Z`` (the case d = 1).
* ``preset_stiefel``: M_2^{2n-1} in C^{n+1} with the induced Euclidean
  metric (d = 2), a unit tangent bundle of S^n.

Both actions are linear, so the Killing field of ``a I + A`` at ``w`` is
``K w`` for a fixed complex matrix ``K``; the metric functions and their
derivatives follow from ``w, w', w''`` along the normal geodesic.
"""

from __future__ import annotations

import math

import numpy as np

from .curves import ClosedFormCurve
from .diagram import GroupDiagram, brieskorn_diagram
from .errors import InputError
from .metricmodel import MetricProfile, solve_t0

_ZERO = 1e-13


def _killing_matrix(elem, ambient: str, d: int) -> np.ndarray:
    """Complex matrix of the Killing field of ``elem`` on the ambient space."""
    n = elem.n
    a = float(elem.so2_part)
    A = np.asarray(elem.mat_part, dtype=float)
    if ambient == "sphere":  # C^n, SO(2) acts by e^{i d theta}
        return 1j * d * a * np.eye(n) + A
    # C^{n+1} = C z0 + C^n, SO(2) acts by (e^{2 i theta}, e^{i d theta})
    K = np.zeros((n + 1, n + 1), dtype=complex)
    K[0, 0] = 2j * a
    K[1:, 1:] = 1j * d * a * np.eye(n) + A
    return K


def _re_inner(u, v) -> float:
    return float(np.real(np.vdot(u, v)))


class KillingGeodesic:
    """Metric data of g_t = <K_A w(t), K_B w(t)> along a geodesic w(t)."""

    def __init__(self, diagram: GroupDiagram, ambient: str, path, L: float):
        self.diagram = diagram
        self.path = path
        self.L = L
        d = diagram.params["d"]
        self.K = [_killing_matrix(e, ambient, d) for e in diagram.complement_basis]

    def fields(self, t: float):
        w, w1, w2 = self.path(t)
        return [(K @ w, K @ w1, K @ w2) for K in self.K]

    def gram(self, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Gram matrix of g_t in the complement basis with its derivatives."""
        fs = self.fields(t)
        m = len(fs)
        G, G1, G2 = np.zeros((m, m)), np.zeros((m, m)), np.zeros((m, m))
        for i, (a, a1, a2) in enumerate(fs):
            for j, (b, b1, b2) in enumerate(fs):
                G[i, j] = _re_inner(a, b)
                G1[i, j] = _re_inner(a1, b) + _re_inner(a, b1)
                G2[i, j] = _re_inner(a2, b) + 2 * _re_inner(a1, b1) + _re_inner(a, b2)
        return G, G1, G2

    def norm_jet(self, idx: int, t: float):
        v, v1, v2 = self.fields(t)[idx]
        r = float(np.linalg.norm(v))
        if r < _ZERO:
            s1 = float(np.linalg.norm(v1))
            sign = 1.0 if t < 0.5 * self.L else -1.0
            return 0.0, sign * s1, sign * _re_inner(v1, v2) / s1
        d1 = _re_inner(v, v1) / r
        d2 = (_re_inner(v1, v1) + _re_inner(v, v2) - d1 * d1) / r
        return r, d1, d2

    def inner_jet(self, i: int, j: int, t: float):
        fs = self.fields(t)
        (a, a1, a2), (b, b1, b2) = fs[i], fs[j]
        return (
            _re_inner(a, b),
            _re_inner(a1, b) + _re_inner(a, b1),
            _re_inner(a2, b) + 2 * _re_inner(a1, b1) + _re_inner(a, b2),
        )

    def profile(self, n: int, d: int, name: str) -> MetricProfile:
        D = self.diagram
        ix, iy, ie, jf = D.index("X"), D.index("Y"), D.index("E1"), D.index("F1")

        def vec(fn, *args):
            return np.vectorize(lambda t: fn(*args, float(t)), otypes=[float, float, float])

        def curve(fn, *args):
            def jet(t):
                if np.ndim(t) == 0:
                    return fn(*args, float(t))
                return vec(fn, *args)(t)

            return ClosedFormCurve(jet)

        curves = {
            "f1": curve(self.norm_jet, ix),
            "f2": curve(self.norm_jet, iy),
            "f12": curve(self.inner_jet, ix, iy),
            "h1": curve(self.norm_jet, ie),
            "h2": curve(self.norm_jet, jf),
            "h12": curve(self.inner_jet, ie, jf),
        }
        return MetricProfile(n=n, d=d, L=self.L, curves=curves, reduced=False, metadata={"preset": name})


def _round_path(n: int):
    e1, e2 = np.zeros(n, dtype=complex), np.zeros(n, dtype=complex)
    e1[0], e2[1] = 1.0, 1.0
    q = math.pi / 4

    def path(t):
        c, s = math.cos(q - t), math.sin(q - t)
        w = c * e1 - 1j * s * e2
        w1 = s * e1 + 1j * c * e2
        return w, w1, -w

    return path, q


def _stiefel_path(n: int):
    e0, e1, e2 = (np.zeros(n + 1, dtype=complex) for _ in range(3))
    e0[0], e1[1], e2[2] = 1.0, 1.0, 1.0
    r2 = math.sqrt(2.0)

    def path(t):
        c, s = math.cos(r2 * t), math.sin(r2 * t)
        w = (e1 + 1j * (s * e0 - c * e2)) / r2
        w1 = 1j * (c * e0 + s * e2)
        w2 = 1j * r2 * (-s * e0 + c * e2)
        return w, w1, w2

    return path, math.pi / (2 * r2)


def round_geodesic(n: int) -> KillingGeodesic:
    path, L = _round_path(n)
    return KillingGeodesic(brieskorn_diagram(n, 1), "sphere", path, L)


def stiefel_geodesic(n: int) -> KillingGeodesic:
    path, L = _stiefel_path(n)
    return KillingGeodesic(brieskorn_diagram(n, 2), "brieskorn", path, L)


def preset_round(n: int) -> MetricProfile:
    if n < 4:
        raise InputError("presets need n >= 4")
    prof = round_geodesic(n).profile(n, 1, "round")
    return _with_meta(prof, {"t0": solve_t0(1)})


def preset_stiefel(n: int) -> MetricProfile:
    if n < 4:
        raise InputError("presets need n >= 4")
    prof = stiefel_geodesic(n).profile(n, 2, "stiefel")
    return _with_meta(prof, {"t0": solve_t0(2)})


def _with_meta(prof: MetricProfile, extra: dict) -> MetricProfile:
    from dataclasses import replace

    meta = dict(prof.metadata)
    meta.update(extra)
    return replace(prof, metadata=meta)
