"""Curvature of cohomogeneity one metrics along a normal geodesic.

Vectors are coefficient arrays over a diagram's Q-orthonormal complement
basis. The metric at time t is the Gram matrix G of g_t in that basis, so
``g_t(u, v) = u @ G @ v``.

The curvature tensor uses ``R(a, b, c, d) = g(R(a, b)c, d)`` with
``R(a, b) = [nabla_a, nabla_b] - nabla_[a,b]``, so ``R(a, b, b, a)`` is the
(unnormalized) sectional curvature of the plane spanned by a and b.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _rational as rat
from .diagram import GroupDiagram
from .errors import DegenerateMetricError, InputError, IntegrationError
from .liealg import AlgElement, basis_element, bracket
from .metricmodel import MetricJet, MetricProfile

# -- metric operator ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MetricOperator:
    """Gram matrix of g_t with its inverse and t-derivatives."""

    G: np.ndarray
    Ginv: np.ndarray
    G1: np.ndarray
    G2: np.ndarray | None = None
    t: float | None = None

    @classmethod
    def from_gram(cls, G, G1=None, G2=None, t=None) -> "MetricOperator":
        G = np.asarray(G, dtype=float)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise InputError("Gram matrix must be square")
        if not np.abs(G - G.T).max() <= 1e-12 * max(1.0, np.abs(G).max()):
            raise InputError("Gram matrix is not symmetric")
        _require_positive_definite(G)
        G1 = np.zeros_like(G) if G1 is None else np.asarray(G1, dtype=float)
        G2 = None if G2 is None else np.asarray(G2, dtype=float)
        return cls(G, np.linalg.inv(G), G1, G2, t)

    @property
    def dim(self) -> int:
        return self.G.shape[0]

    def inner(self, u, v) -> float:
        return float(np.asarray(u) @ self.G @ np.asarray(v))

    def norm(self, u) -> float:
        return math.sqrt(max(self.inner(u, u), 0.0))

    def shape_operator(self) -> np.ndarray:
        """S = 1/2 G^-1 G'."""
        return 0.5 * self.Ginv @ self.G1

    def inverse_residual(self) -> float:
        return float(np.abs(self.Ginv @ self.G - np.eye(self.dim)).max())


def _require_positive_definite(G: np.ndarray) -> None:
    try:
        np.linalg.cholesky(G)
        if np.all(np.isfinite(G)):
            return
    except np.linalg.LinAlgError:
        pass
    for k in range(1, G.shape[0] + 1):
        minor = float(np.linalg.det(G[:k, :k]))
        if not minor > 0:
            break
    raise DegenerateMetricError(f"metric not positive definite: leading minor {k} = {minor:.3e}")


def _brieskorn_blocks(diagram: GroupDiagram, jet: MetricJet, order: int):
    """Gram matrix (order 0), or its derivatives, assembled from the jet."""
    src = (jet.v, jet.d1, jet.d2)
    m = diagram.dim
    ix, iy = diagram.index("X"), diagram.index("Y")
    es, fs = diagram.block_labels["m1"], diagram.block_labels["m2"]

    def sq(name):
        # derivatives of f^2
        v, d1, d2 = jet.v[name], jet.d1[name], jet.d2[name]
        return (v * v, 2 * v * d1, 2 * (d1 * d1 + v * d2))[order]

    G = np.zeros((m, m))
    G[ix, ix], G[iy, iy] = sq("f1"), sq("f2")
    G[ix, iy] = G[iy, ix] = src[order]["f12"]
    for e, f in zip(es, fs):
        G[e, e], G[f, f] = sq("h1"), sq("h2")
        G[e, f] = G[f, e] = src[order]["h12"]
    return G


def metric_operator(diagram: GroupDiagram, jet: MetricJet) -> MetricOperator:
    """Gram matrix of g_t on the Brieskorn complement, read off a jet."""
    if diagram.family != "brieskorn":
        raise InputError(f"metric_operator needs a brieskorn diagram, got {diagram.family!r}")
    G = _brieskorn_blocks(diagram, jet, 0)
    return MetricOperator.from_gram(
        G, _brieskorn_blocks(diagram, jet, 1), _brieskorn_blocks(diagram, jet, 2), t=jet.t
    )


def block_operator(diagram: GroupDiagram, blocks: dict, t: float | None = None) -> MetricOperator:
    """Diagonal-by-block metric: ``blocks[label] = (value, d1[, d2])`` scales Q on that block.

    Labels are block names of the diagram; every complement index must be
    covered exactly once.
    """
    m = diagram.dim
    diag = np.full((3, m), np.nan)
    for label, jet in blocks.items():
        if label not in diagram.block_labels:
            raise InputError(f"unknown block {label!r}; have {sorted(diagram.block_labels)}")
        vals = tuple(jet) + (0.0,) * (3 - len(jet))
        for i in diagram.block_labels[label]:
            diag[:, i] = vals
    if np.isnan(diag).any():
        missing = [k for k in diagram.block_labels if k not in blocks]
        raise InputError(f"blocks {missing} have no metric")
    return MetricOperator.from_gram(np.diag(diag[0]), np.diag(diag[1]), np.diag(diag[2]), t=t)


def profile_operator(diagram: GroupDiagram, profile: MetricProfile, t: float) -> MetricOperator:
    return metric_operator(diagram, profile.jet(t))


# -- homogeneous curvature -------------------------------------------------


class HomogeneousCurvature:
    """Levi-Civita curvature of an invariant metric on G/H at the base point.

    Built from the Nomizu map ``Lambda(x) y = 1/2 [x, y]_n + U(x, y)`` with
    ``2 g(U(x, y), z) = g([z, x]_n, y) + g(x, [z, y]_n)``.
    """

    def __init__(self, diagram: GroupDiagram, M: MetricOperator):
        st = diagram.structure
        if M.dim != diagram.dim:
            raise InputError(f"metric has size {M.dim}, complement has {diagram.dim}")
        self.c = st.c
        self.adh = st.adh
        self.M = M
        G, Ginv = M.G, M.Ginv
        # ad[z][k, i] = coefficient of e_k in [e_z, e_i]_n
        ad = np.transpose(st.c, (0, 2, 1))
        u = 0.5 * (np.transpose(ad, (0, 2, 1)) @ G + G @ ad)  # u[z, i, j] = 2 g(U(e_i, e_j), e_z) / 2
        U = np.tensordot(Ginv, u, 1)  # U[k, i, j] = coefficient of e_k in U(e_i, e_j)
        # lam[i][k, j] = coefficient of e_k in Lambda(e_i) e_j
        self.lam = 0.5 * ad + np.transpose(U, (1, 0, 2))
        m = M.dim
        self._m = m
        self._lam_flat = self.lam.reshape(m, m * m)
        self._c_flat = self.c.reshape(m, m * m)
        self._adh_flat = self.adh.reshape(m, m**3)

    def Lambda(self, x) -> np.ndarray:
        m = self._m
        return (np.asarray(x, dtype=float) @ self._lam_flat).reshape(m, m)

    def operator(self, a, b) -> np.ndarray:
        """Matrix of R(a, b) acting on the complement."""
        m = self._m
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        La, Lb = self.Lambda(a), self.Lambda(b)
        ab = b @ (a @ self._c_flat).reshape(m, m)
        adh = (b @ (a @ self._adh_flat).reshape(m, m * m)).reshape(m, m)
        return La @ Lb - Lb @ La - self.Lambda(ab) - adh

    def tensor(self, a, b, c, d) -> float:
        return float(np.asarray(d) @ self.M.G @ self.operator(a, b) @ np.asarray(c))

    def sectional(self, a, b) -> float:
        return self.tensor(a, b, b, a) / area2(self.M, a, b)


def area2(M: MetricOperator, a, b) -> float:
    """|a|^2 |b|^2 - g(a, b)^2; raises on dependent vectors."""
    aa, bb, ab = M.inner(a, a), M.inner(b, b), M.inner(a, b)
    val = aa * bb - ab * ab
    if val <= 1e-14 * max(aa * bb, 1e-300):
        raise InputError("plane vectors are linearly dependent")
    return val


def homogeneous_curvature(diagram: GroupDiagram, M: MetricOperator, A, B, C, D) -> float:
    """R(A, B, C, D) of the homogeneous metric g_t on G/H."""
    return HomogeneousCurvature(diagram, M).tensor(A, B, C, D)


# -- orbit-tangent and radial planes --------------------------------------


def second_fundamental_form(M: MetricOperator, a, b) -> float:
    """Radial component of the orbit's second fundamental form: -1/2 g'(a, b)."""
    return -0.5 * float(np.asarray(a) @ M.G1 @ np.asarray(b))


def ambient_tensor(diagram: GroupDiagram, M: MetricOperator, a, b, c, d, hom: HomogeneousCurvature | None = None) -> float:
    """R(a, b, c, d) of M for orbit-tangent a, b, c, d (Gauss equation)."""
    hom = hom if hom is not None else HomogeneousCurvature(diagram, M)
    sff = lambda u, v: second_fundamental_form(M, u, v)  # noqa: E731
    return hom.tensor(a, b, c, d) + sff(a, c) * sff(b, d) - sff(b, c) * sff(a, d)


def orbit_plane_curvature(diagram: GroupDiagram, jet, A, B) -> float:
    """Unnormalized R(A, B, B, A) on M for an orbit-tangent plane.

    ``jet`` is a MetricJet (Brieskorn family) or a MetricOperator.
    """
    M = jet if isinstance(jet, MetricOperator) else metric_operator(diagram, jet)
    area2(M, A, B)
    return ambient_tensor(diagram, M, A, B, B, A)


def orbit_plane_sectional(diagram: GroupDiagram, jet, A, B) -> float:
    M = jet if isinstance(jet, MetricOperator) else metric_operator(diagram, jet)
    return orbit_plane_curvature(diagram, M, A, B) / area2(M, A, B)


def radial_operator(M: MetricOperator) -> np.ndarray:
    """Symmetric matrix K with R(V, gamma', gamma', V) = V @ K @ V."""
    if M.G2 is None:
        raise InputError("radial curvature needs second derivatives of the metric")
    K = -(0.5 * M.G2 - 0.25 * M.G1 @ M.Ginv @ M.G1)
    return 0.5 * (K + K.T)


def radial_curvature(diagram: GroupDiagram, jet, V) -> float:
    """Unnormalized R(V, gamma', gamma', V); gamma' is a unit normal."""
    M = jet if isinstance(jet, MetricOperator) else metric_operator(diagram, jet)
    V = np.asarray(V, dtype=float)
    return float(V @ radial_operator(M) @ V)


def radial_sectional(diagram: GroupDiagram, jet, V) -> float:
    M = jet if isinstance(jet, MetricOperator) else metric_operator(diagram, jet)
    return radial_curvature(diagram, M, V) / M.inner(V, V)


# -- reduced-model closed forms ------------------------------------------


_VARIANTS = ("printed", "corrected")


def _reduced_parts(jet: MetricJet, variant: str):
    if variant not in _VARIANTS:
        raise InputError(f"unknown variant {variant!r}; use one of {_VARIANTS}")
    v, d1 = jet.v, jet.d1
    sign = 1.0 if variant == "printed" else -1.0
    h2, h2p = v["h2"], d1["h2"]
    delta = 1.0 - h2 * h2
    ddelta = -2.0 * h2 * h2p
    return v["f1"], v["f2"], sign * v["f12"], d1["f1"], d1["f2"], sign * d1["f12"], h2, h2p, delta, ddelta


def closed_form_EF(jet: MetricJet, variant: str = "printed") -> float:
    """R(A, B, B, A) for A = E_1 + F_2, B = E_2 + F_1 in the reduced model.

    ``variant="printed"`` evaluates
    ``1/2 delta^2 (f1^2 + f2^2 - 2 f12^2) / (f1^2 f2^2 - f12^2) - h2^2 h2'^2``
    verbatim. ``variant="corrected"`` is the expression the curvature engine
    reproduces: the numerator is linear, ``f1^2 + f2^2 + 2 f12``, where
    f12 = g(X, Y) with X = (I/d + E_12)/sqrt2 and Y = (I/d - E_12)/sqrt2.
    """
    f1, f2, f12, _, _, _, h2, h2p, delta, _ = _reduced_parts(jet, variant)
    den = f1 * f1 * f2 * f2 - f12 * f12
    if den == 0:
        raise DegenerateMetricError("f1^2 f2^2 - f12^2 = 0")
    num = f1 * f1 + f2 * f2 - 2 * (f12 * f12 if variant == "printed" else f12)
    return 0.5 * delta * delta * num / den - h2 * h2 * h2p * h2p


def closed_form_XF1(jet: MetricJet, variant: str = "printed") -> np.ndarray:
    """[[R(X,F1,X,F1), R(X,F1,Y,F1)], [., R(Y,F1,Y,F1)]] in the reduced model.

    ``variant="printed"`` evaluates the three expressions verbatim. The
    engine agrees with them after f12 -> -f12 (and f12' -> -f12'), with
    the off-diagonal entry changing sign; ``variant="corrected"`` applies
    exactly that substitution.
    """
    f1, f2, f12, f1p, f2p, f12p, _, _, dl, dlp = _reduced_parts(jet, variant)
    rxx = -dl * (4 - 2 * f1**2 - 2 * f12 - dl) / 8 + (f1**2 + f12) ** 2 / 8 + 0.5 * f1 * f1p * dlp
    ryy = -dl * (4 - 2 * f2**2 - 2 * f12 - dl) / 8 + (f2**2 + f12) ** 2 / 8 + 0.5 * f2 * f2p * dlp
    rxy = -dl * (4 - f1**2 - f2**2 - 2 * f12 - dl) / 8 + (f1**2 + f12) * (f2**2 + f12) / 8 + 0.25 * f12p * dlp
    if variant == "corrected":
        rxy = -rxy
    return np.array([[rxx, rxy], [rxy, ryy]])


def engine_XF1(diagram: GroupDiagram, jet) -> np.ndarray:
    """The engine's 2x2 form (u, v) -> R(u, F1, F1, v) on span{X, Y}."""
    M = jet if isinstance(jet, MetricOperator) else metric_operator(diagram, jet)
    hom = HomogeneousCurvature(diagram, M)
    X, Y, F = diagram.unit("X"), diagram.unit("Y"), diagram.unit("F1")
    out = np.empty((2, 2))
    for i, u in enumerate((X, Y)):
        for j, v in enumerate((X, Y)):
            out[i, j] = ambient_tensor(diagram, M, u, F, F, v, hom)
    return 0.5 * (out + out.T)


def plane_AB(diagram: GroupDiagram) -> tuple[np.ndarray, np.ndarray]:
    """A = E_1 + F_2 and B = E_2 + F_1."""
    return diagram.vector(E1=1, F2=1), diagram.vector(E2=1, F1=1)


# -- parallel transport -----------------------------------------------------


@dataclass(frozen=True)
class TransportInfo:
    steps: int
    error_estimate: float
    tol: float
    refinements: int


def _rk4(rhs, t0: float, t1: float, y0: np.ndarray, steps: int) -> np.ndarray:
    h = (t1 - t0) / steps
    y = y0.copy()
    t = t0
    for _ in range(steps):
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return y


def integrate_rk4(rhs, t0, t1, y0, tol=1e-10, steps=16, max_steps=2**16):
    """Fixed-step RK4 with step doubling until the Richardson estimate is below ``tol``.

    Returns the Richardson-extrapolated solution and a TransportInfo.
    """
    y0 = np.asarray(y0, dtype=float)
    coarse = _rk4(rhs, t0, t1, y0, steps)
    refinements = 0
    while True:
        fine = _rk4(rhs, t0, t1, y0, 2 * steps)
        err = float(np.abs(fine - coarse).max()) / 15.0
        if not np.all(np.isfinite(fine)):
            raise IntegrationError(f"non-finite state with {2 * steps} steps on [{t0}, {t1}]")
        scale = max(1.0, float(np.abs(fine).max()))
        if err <= tol * scale:
            y = fine + (fine - coarse) / 15.0
            return y, TransportInfo(2 * steps, err, tol, refinements)
        steps *= 2
        refinements += 1
        if 2 * steps > max_steps:
            raise IntegrationError(
                f"step-size failure on [{t0}, {t1}]: error estimate {err:.3e} > tol {tol:.1e} with {steps} steps"
            )
        coarse = fine


def parallel_transport(
    diagram: GroupDiagram, profile, t0: float, t1: float, v, tol: float = 1e-11, return_info: bool = False
):
    """Transport the coefficient vector ``v`` from t0 to t1 along the normal geodesic.

    Solves ``c' = -S_t c`` with ``S_t = 1/2 G_t^-1 G_t'``. ``profile`` is a
    MetricProfile or a callable ``t -> MetricOperator``.
    """
    if callable(profile) and not isinstance(profile, MetricProfile):
        op = profile
    else:
        L = profile.L
        if not (0 < t0 < L and 0 < t1 < L):
            raise InputError(f"transport interval [{t0}, {t1}] must lie in (0, {L})")
        op = lambda t: metric_operator(diagram, profile.jet(t))  # noqa: E731

    def rhs(t, c):
        return -op(t).shape_operator() @ c

    y, info = integrate_rk4(rhs, float(t0), float(t1), np.asarray(v, dtype=float), tol=tol)
    return (y, info) if return_info else y


# -- the SO(n) family -------------------------------------------------------


def thm31_w(a, k: int, n: int) -> AlgElement:
    """w = [Y_2, X_2] - [X_1, Y_1] with X_i = Ad_a E_{k-1,k+i}, Y_i = E_{k,k+i}.

    ``a`` is a (k-1)x(k-1) orthogonal matrix embedded in the upper-left block;
    exact when its entries are rational.
    """
    if n < k + 2:
        raise InputError(f"need n >= k + 2 = {k + 2}, got n = {n}")
    a = np.asarray(a, dtype=object)
    if a.shape != (k - 1, k - 1):
        raise InputError(f"a must be {(k - 1)}x{(k - 1)}, got {a.shape}")
    exact = all(isinstance(x, (int, Fraction)) for x in a.flat)
    if exact:
        full = np.array(rat.identity(n), dtype=object)
        full[: k - 1, : k - 1] = np.vectorize(Fraction, otypes=[object])(a)
        ad = lambda z: AlgElement.from_matrix(full @ z.mat_part @ full.T)  # noqa: E731
    else:
        full = np.eye(n)
        full[: k - 1, : k - 1] = np.asarray(a, dtype=float)
        ad = lambda z: AlgElement.from_matrix(full @ np.asarray(z.mat_part, dtype=float) @ full.T, exact=False)  # noqa: E731
    E = lambda i, j: basis_element(i, j, n, exact=exact)  # noqa: E731
    X1, X2 = ad(E(k - 1, k + 1)), ad(E(k - 1, k + 2))
    Y1, Y2 = E(k, k + 1), E(k, k + 2)
    return bracket(Y2, X2) - bracket(X1, Y1)


def thm31_w_expected(a, k: int, n: int) -> AlgElement:
    """2 sum_s a_{s,k-1} E_{s,k}."""
    a = np.asarray(a, dtype=object)
    exact = all(isinstance(x, (int, Fraction)) for x in a.flat)
    out = AlgElement.zero(n, exact=exact)
    for s in range(1, k):
        out = out + basis_element(s, k, n, exact=exact).scale(2 * a[s - 1, k - 2])
    return out


def closed_form_thm31(diagram31: GroupDiagram, block_metric: MetricOperator, delta: float, ddelta: float, a) -> float:
    """1/4 delta^2 Q(w, P_t^-1 w) - 1/4 delta'^2.

    The complement component of w is used; P_t^-1 is the inverse Gram
    matrix of ``block_metric`` in the Q-orthonormal complement basis.
    """
    k, n = diagram31.params["k"], diagram31.n
    w = thm31_w(a, k, n)
    coords = diagram31.coords(w.to_float())
    qval = float(coords @ block_metric.Ginv @ coords)
    return 0.25 * delta * delta * qval - 0.25 * ddelta * ddelta


def rational_rotation(k: int, rng: np.random.Generator, factors: int = 6) -> np.ndarray:
    """Random element of SO(k) with rational entries (product of rational Givens rotations).

    Each factor rotates a coordinate plane by the angle of a Pythagorean
    triple ``((p^2 - q^2) / (p^2 + q^2), 2pq / (p^2 + q^2))``.
    """
    out = np.array(rat.identity(k), dtype=object)
    for _ in range(factors):
        i, j = sorted(rng.choice(k, size=2, replace=False))
        p, q = int(rng.integers(1, 9)), int(rng.integers(1, 9))
        r = p * p + q * q
        c, s = Fraction(p * p - q * q, r), Fraction(2 * p * q, r)
        g = np.array(rat.identity(k), dtype=object)
        g[i, i], g[j, j], g[i, j], g[j, i] = c, c, -s, s
        out = g @ out
    return out


# -- planes and traces ------------------------------------------------------


@dataclass(frozen=True)
class PlaneSpec:
    """A plane at time t: two orbit vectors, or one vector together with gamma'."""

    t: float
    u: tuple[float, ...]
    v: tuple[float, ...] | None = None
    radial: bool = False
    name: str = ""

    def __post_init__(self):
        if self.radial == (self.v is not None):
            raise InputError("give either a second vector or radial=True, not both")

    def sectional(self, diagram: GroupDiagram, profile: MetricProfile) -> float:
        jet = profile.jet(self.t)
        if self.radial:
            return radial_sectional(diagram, jet, np.array(self.u))
        return orbit_plane_sectional(diagram, jet, np.array(self.u), np.array(self.v))

    def unnormalized(self, diagram: GroupDiagram, profile: MetricProfile) -> float:
        jet = profile.jet(self.t)
        if self.radial:
            return radial_curvature(diagram, jet, np.array(self.u))
        return orbit_plane_curvature(diagram, jet, np.array(self.u), np.array(self.v))

    def to_dict(self) -> dict:
        return {"t": self.t, "u": list(self.u), "v": None if self.v is None else list(self.v),
                "radial": self.radial, "name": self.name}

    @classmethod
    def from_dict(cls, doc: dict) -> "PlaneSpec":
        v = doc.get("v")
        return cls(float(doc["t"]), tuple(doc["u"]), None if v is None else tuple(v), bool(doc.get("radial", False)),
                   doc.get("name", ""))


@dataclass
class TraceRow:
    t: float
    plane: str
    sectional: float
    residual: float | None = None


def curvature_trace(diagram: GroupDiagram, profile: MetricProfile, ts: Iterable[float]) -> list[TraceRow]:
    """Catalog planes along the geodesic, with residuals against the closed forms when reduced."""
    rows = []
    A, B = plane_AB(diagram)
    X, Y, F = diagram.unit("X"), diagram.unit("Y"), diagram.unit("F1")
    for t in ts:
        jet = profile.jet(float(t))
        M = metric_operator(diagram, jet)
        hom = HomogeneousCurvature(diagram, M)
        rab = ambient_tensor(diagram, M, A, B, B, A, hom)
        res = abs(rab - closed_form_EF(jet, "corrected")) if profile.reduced else None
        rows.append(TraceRow(float(t), "E1+F2,E2+F1", rab / area2(M, A, B), res))
        cf = closed_form_XF1(jet, "corrected") if profile.reduced else None
        for name, u, idx in (("X,F1", X, 0), ("Y,F1", Y, 1)):
            val = ambient_tensor(diagram, M, u, F, F, u, hom)
            res = abs(val - cf[idx, idx]) if cf is not None else None
            rows.append(TraceRow(float(t), name, val / area2(M, u, F), res))
        rows.append(TraceRow(float(t), "gamma',F1", radial_sectional(diagram, M, F), None))
    return rows


def write_trace_csv(rows: Sequence[TraceRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "plane-id", "sectional-curvature", "residual-vs-closed-form"])
        for r in rows:
            w.writerow([repr(float(r.t)), r.plane, repr(float(r.sectional)), "" if r.residual is None else repr(float(r.residual))])
