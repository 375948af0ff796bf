"""Executable form of the non-negative curvature obstruction.

Every check either passes or returns a :class:`WitnessCertificate`: a
plane (or a transported field) at a specific parameter whose curvature,
recomputed by the engine from the stored data, is negative. Inequality
residuals are reported alongside but a plane certificate is only emitted
after the engine confirms the sign.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.integrate import trapezoid
from scipy.optimize import minimize_scalar

from .curvature import (
    HomogeneousCurvature,
    MetricOperator,
    ambient_tensor,
    area2,
    closed_form_thm31,
    metric_operator,
    orbit_plane_sectional,
    plane_AB,
    radial_sectional,
    thm31_w,
)
from .curves import Curve, PolyCurve
from .diagram import GroupDiagram, brieskorn_diagram
from .errors import ConfigurationError, DegenerateMetricError, InputError, IntegrationError
from .metricmodel import MetricJet, MetricProfile, normalize, smoothness_check

INEQ_TOL = 1e-7
CURV_TOL = 1e-9
GRID_POINTS = 2000
ROUNDOFF_FACTOR = 1e3
KINDS = ("orbit-plane", "determinant", "concavity", "second-variation", "thm31-bound")


def default_eps(L: float) -> float:
    return min(0.1 * L, 0.05)


def scan_grid(L: float, points: int = GRID_POINTS, near_zero: float = 1e-4, geometric: int = 60) -> np.ndarray:
    """Interior grid: ``points`` uniform values plus a geometric cluster towards t = 0."""
    lin = np.linspace(0.0, L, points + 2)[1:-1]
    geo = L * np.geomspace(near_zero, 1.0 / (points + 1), geometric)
    return np.unique(np.concatenate([geo, lin]))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("COHOMONE_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items):
    """Ordered map, threaded when COHOMONE_THREADS > 1; results never depend on it."""
    n = _threads()
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# -- certificates -------------------------------------------------------------


@dataclass
class WitnessCertificate:
    kind: str
    t: float
    value: float
    tol: float
    data: dict = field(default_factory=dict)
    note: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown certificate kind {self.kind!r}")

    def replay(self, diagram: GroupDiagram | None, profile) -> float:
        """Recompute the certified quantity from the stored data."""
        return _REPLAY[self.data["mode"]](self, diagram, profile)

    def verify(self, diagram, profile) -> bool:
        return abs(self.replay(diagram, profile) - self.value) <= self.tol

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "WitnessCertificate":
        return cls(doc["kind"], float(doc["t"]), float(doc["value"]), float(doc["tol"]), dict(doc["data"]), doc.get("note", ""))


def _replay_plane(cert, diagram, profile):
    jet = profile.jet(cert.t)
    return orbit_plane_sectional(diagram, jet, np.array(cert.data["u"]), np.array(cert.data["v"]))


def _replay_radial(cert, diagram, profile):
    return radial_sectional(diagram, profile.jet(cert.t), np.array(cert.data["u"]))


def _replay_integral(cert, diagram, profile):
    res = second_variation_check(diagram, profile, margin=cert.data["margin"], steps=cert.data["steps"])
    return res.integral


def _replay_thm31(cert, diagram, block):
    a = np.array(cert.data["a"], dtype=float)
    M = block.operator(diagram, cert.t)
    h, hp = block.h.jet(cert.t)[:2]
    val = closed_form_thm31(diagram, M, 1 - h * h, -2 * h * hp, a)
    return val / (1 + h * h) ** 2


_REPLAY = {"plane": _replay_plane, "radial": _replay_radial, "integral": _replay_integral, "thm31": _replay_thm31}


def _plane_certificate(kind, diagram, profile, t, u, v, tol, **extra) -> WitnessCertificate | None:
    val = orbit_plane_sectional(diagram, profile.jet(t), u, v)
    if not val < -tol:
        return None
    data = {"mode": "plane", "u": [float(x) for x in u], "v": [float(x) for x in v], **extra}
    return WitnessCertificate(kind, float(t), float(val), _replay_tol(val), data)


def _radial_certificate(kind, diagram, profile, t, u, tol, **extra) -> WitnessCertificate | None:
    val = radial_sectional(diagram, profile.jet(t), u)
    if not val < -tol:
        return None
    data = {"mode": "radial", "u": [float(x) for x in u], **extra}
    return WitnessCertificate(kind, float(t), float(val), _replay_tol(val), data)


def _replay_tol(val: float) -> float:
    return 1e-9 * max(1.0, abs(val))


# -- delta --------------------------------------------------------------------


@dataclass
class DeltaTrace:
    ts: np.ndarray
    delta: np.ndarray
    ddelta: np.ndarray

    @property
    def signs(self) -> str:
        """Run-length sign pattern of delta, e.g. ``"0+"``."""
        s = np.where(np.abs(self.delta) <= 1e-12, "0", np.where(self.delta > 0, "+", "-"))
        out = []
        for c in s:
            if not out or out[-1] != c:
                out.append(c)
        return "".join(out)


def _require_normalized(p: MetricProfile) -> None:
    if not p.is_normalized:
        raise InputError("profile is not normalized (h1(0) != 1); call metricmodel.normalize first")


def delta_trace(p: MetricProfile, grid=None) -> DeltaTrace:
    """delta = 1 - h2^2 and delta' = -2 h2 h2' on a grid."""
    _require_normalized(p)
    ts = p.grid(GRID_POINTS) if grid is None else np.asarray(grid, dtype=float)
    h, hp, _ = p.values("h2", ts)
    return DeltaTrace(ts, 1.0 - h * h, -2.0 * h * hp)


# -- results ------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    witness: WitnessCertificate | None = None
    applicable: bool = True
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "applicable": self.applicable,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "details": _jsonable(self.details),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


# -- concavity ----------------------------------------------------------------


def check_concavity(p: MetricProfile, grid=None, tol: float = INEQ_TOL, diagram: GroupDiagram | None = None) -> CheckResult:
    """h2 must be concave: sec(gamma', F1) = -h2''/h2 >= 0 where h2 > 0."""
    diagram = diagram or brieskorn_diagram(p.n, p.d)
    ts = scan_grid(p.L) if grid is None else np.asarray(grid, dtype=float)
    h, _, hpp = p.values("h2", ts)
    live = h > 0
    worst = int(np.argmax(np.where(live, hpp, -np.inf)))
    details = {"max_h2pp": float(hpp[worst]), "t_max": float(ts[worst]), "points": int(len(ts))}
    if not hpp[worst] > tol:
        return CheckResult("concavity", True, details=details)
    t = _refine(lambda s: -p.curves["h2"].jet(s)[2], ts, worst, p.L)
    F = diagram.unit("F1")
    cert = _radial_certificate("concavity", diagram, p, t, F, CURV_TOL, h2pp=float(p.curves["h2"].jet(t)[2]))
    return CheckResult("concavity", cert is None, cert, details=details)


def _refine(fn: Callable[[float], float], ts: np.ndarray, i: int, L: float) -> float:
    """Minimize fn near grid index i (bounded by the neighbouring grid points)."""
    lo = ts[i - 1] if i > 0 else 0.5 * ts[0]
    hi = ts[i + 1] if i + 1 < len(ts) else 0.5 * (ts[i] + L)
    try:
        res = minimize_scalar(fn, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12 * max(L, 1.0)})
        if res.success and fn(res.x) <= fn(ts[i]):
            return float(res.x)
    except (DegenerateMetricError, ValueError):
        pass
    return float(ts[i])


# -- the E + F plane inequality ------------------------------------------------


@dataclass
class Cond2Result:
    t: float
    lhs: float
    rhs: float
    residual: float
    engine_value: float | None = None
    witness: WitnessCertificate | None = None

    @property
    def violated(self) -> bool:
        return self.witness is not None


def cond2_sides(jet: MetricJet, variant: str = "printed") -> tuple[float, float]:
    """(delta')^2 and 2 (f1^2 + f2^2 - 2 f12^2)/(f1^2 f2^2 - f12^2) delta^2.

    ``variant="corrected"`` uses the linear numerator f1^2 + f2^2 + 2 f12
    that the engine produces (see ``curvature.closed_form_EF``).
    """
    v = jet.v
    f1, f2, f12, h2 = v["f1"], v["f2"], v["f12"], v["h2"]
    den = f1 * f1 * f2 * f2 - f12 * f12
    if not den > 0:
        raise DegenerateMetricError(f"X-Y block degenerate: f1^2 f2^2 - f12^2 = {den:.3e}")
    if variant == "printed":
        num = f1 * f1 + f2 * f2 - 2 * f12 * f12
    elif variant == "corrected":
        num = f1 * f1 + f2 * f2 + 2 * f12
    else:
        raise InputError(f"unknown variant {variant!r}")
    delta = 1 - h2 * h2
    ddelta = -2 * h2 * jet.d1["h2"]
    return ddelta * ddelta, 2 * num / den * delta * delta


def check_cond2(p, t: float | None = None, tol: float = INEQ_TOL, variant: str = "printed",
                diagram: GroupDiagram | None = None) -> Cond2Result:
    """Residual (delta')^2 - RHS at t; a positive residual beyond tol is confirmed by the engine.

    ``p`` is a MetricProfile (with ``t``) or a MetricJet.
    """
    jet = p if isinstance(p, MetricJet) else p.jet(t)
    lhs, rhs = cond2_sides(jet, variant)
    res = Cond2Result(jet.t, lhs, rhs, lhs - rhs)
    if res.residual > tol and isinstance(p, MetricProfile):
        diagram = diagram or brieskorn_diagram(p.n, p.d)
        A, B = plane_AB(diagram)
        res.engine_value = orbit_plane_sectional(diagram, jet, A, B)
        res.witness = _plane_certificate("orbit-plane", diagram, p, jet.t, A, B, CURV_TOL,
                                         residual=float(res.residual))
    return res


# -- the determinant condition --------------------------------------------------


@dataclass
class DeterminantResult:
    t: float
    matrix: np.ndarray
    residual: float
    r: float | None = None
    min_sectional: float | None = None
    floor: float = 0.0
    witness: WitnessCertificate | None = None


def xy_form(diagram: GroupDiagram, jet, hom: HomogeneousCurvature | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(R(u, F1, F1, v) on span{X, Y}, the area form (|u|^2|F1|^2 - g(u,F1)^2) there)."""
    M = jet if isinstance(jet, MetricOperator) else metric_operator(diagram, jet)
    hom = hom if hom is not None else HomogeneousCurvature(diagram, M)
    V = np.column_stack([diagram.unit("X"), diagram.unit("Y")])
    F = diagram.unit("F1")
    # R(u, F) F for u = X, Y, with the Gauss correction added below
    RuF = np.column_stack([hom.operator(V[:, i], F) @ F for i in range(2)])
    G, G1 = M.G, M.G1
    gF, g1F = V.T @ G @ F, V.T @ G1 @ F
    R = V.T @ G @ RuF + 0.25 * (np.outer(g1F, g1F) - (F @ G1 @ F) * (V.T @ G1 @ V))
    S = (F @ G @ F) * (V.T @ G @ V) - np.outer(gF, gF)
    return 0.5 * (R + R.T), 0.5 * (S + S.T)


def most_negative_plane(R: np.ndarray, S: np.ndarray) -> tuple[float, np.ndarray]:
    """Smallest generalized eigenvalue of (R, S) and its eigenvector (c_X, c_Y)."""
    if R.shape == (2, 2):
        # det(R - lam S) = 0 is a quadratic; solving it directly is much cheaper than LAPACK
        a = S[0, 0] * S[1, 1] - S[0, 1] ** 2
        b = -(R[0, 0] * S[1, 1] + R[1, 1] * S[0, 0] - 2 * R[0, 1] * S[0, 1])
        c = R[0, 0] * R[1, 1] - R[0, 1] ** 2
        disc = b * b - 4 * a * c
        if a > 0 and disc >= 0:
            q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
            roots = sorted(r for r in (q / a, c / q if q != 0 else q / a))
            lam = roots[0]
            A = R - lam * S
            vec = np.array([-A[0, 1], A[0, 0]]) if abs(A[0, 0]) + abs(A[0, 1]) > abs(A[1, 1]) + abs(A[1, 0]) \
                else np.array([A[1, 1], -A[1, 0]])
            if np.any(vec):
                return float(lam), vec / math.sqrt(vec @ S @ vec)
    w, V = sla.eigh(R, S)
    return float(w[0]), V[:, 0]


def roundoff_floor(R: np.ndarray, S: np.ndarray) -> float:
    """Size of sectional values indistinguishable from rounding error.

    Entries of R carry absolute errors of order eps * max|R|; dividing by
    the area form amplifies them by 1 / lambda_min(S). This matters only
    where a plane nearly collapses (t -> 0 for planes containing X).
    """
    smin = float(np.linalg.eigvalsh(S)[0])
    scale = float(np.abs(R).max())
    return ROUNDOFF_FACTOR * np.finfo(float).eps * scale / max(smin, np.finfo(float).tiny)


def r_scan(R: np.ndarray, S: np.ndarray, rs: Sequence[float]) -> tuple[float, float]:
    """Finite scan of sec(X + rY, F1); returns (best r, sectional)."""
    best = (float("nan"), float("inf"))
    for r in rs:
        c = np.array([1.0, r])
        val = float(c @ R @ c / (c @ S @ c))
        if val < best[1]:
            best = (float(r), val)
    return best


def check_determinant(p, t: float | None = None, tol: float = INEQ_TOL, diagram: GroupDiagram | None = None) -> DeterminantResult:
    """R(X,F1,X,F1) R(Y,F1,Y,F1) >= R(X,F1,Y,F1)^2, evaluated by the engine.

    The residual is ``R_XY^2 - R_XX R_YY`` (positive means violated). When
    the form is indefinite the most negative plane (A_r, F1), A_r = X + rY,
    is located by a generalized eigen-solve and checked by an r-scan.
    """
    jet = p if isinstance(p, MetricJet) else p.jet(t)
    if diagram is None:
        diagram = brieskorn_diagram(p.n, p.d) if isinstance(p, MetricProfile) else brieskorn_diagram(4, 3)
    R, S = xy_form(diagram, jet)
    out = DeterminantResult(jet.t, R, float(R[0, 1] ** 2 - R[0, 0] * R[1, 1]))
    lam, c = most_negative_plane(R, S)
    out.min_sectional = lam
    out.floor = roundoff_floor(R, S)
    if abs(c[0]) > 1e-12:
        out.r = float(c[1] / c[0])
    if lam < -(CURV_TOL + out.floor) and isinstance(p, MetricProfile):
        u = c[0] * diagram.unit("X") + c[1] * diagram.unit("Y")
        if out.r is not None:
            rs = out.r + np.linspace(-1, 1, 41) * max(1.0, abs(out.r)) * 1e-2
            r_best, _ = r_scan(R, S, rs)
            if orbit_plane_sectional(diagram, jet, diagram.unit("X") + r_best * diagram.unit("Y"), diagram.unit("F1")) < lam:
                out.r, u = r_best, diagram.unit("X") + r_best * diagram.unit("Y")
        out.witness = _plane_certificate("determinant", diagram, p, jet.t, u, diagram.unit("F1"), CURV_TOL,
                                         r=out.r, residual=out.residual, roundoff_floor=out.floor)
    return out


# -- second variation (the parallel m1 frame) --------------------------------


@dataclass
class SecondVariationResult:
    passed: bool
    applicable: bool
    k_min: float = float("nan")
    t_min: float = float("nan")
    integral: float = float("nan")
    orthogonality_defect: float = float("nan")
    interval: tuple[float, float] = (float("nan"), float("nan"))
    steps: int = 0
    margin: float = 0.0
    error_estimate: float = float("nan")
    reduced_justified: bool = False
    witness: WitnessCertificate | None = None
    note: str = ""
    ts: np.ndarray | None = None
    K: np.ndarray | None = None

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k not in ("ts", "K", "witness")}
        d["witness"] = None if self.witness is None else self.witness.to_dict()
        return _jsonable(d)


def _block_series(p: MetricProfile, ts: np.ndarray):
    """G, G' and G'' of g_t on span{E1, F1} along ts (arrays of 2x2 matrices)."""
    h1, h1p, h1pp = p.values("h1", ts)
    h2, h2p, h2pp = p.values("h2", ts)
    h12, h12p, h12pp = p.values("h12", ts)
    G = np.stack([np.stack([h1 * h1, h12], -1), np.stack([h12, h2 * h2], -1)], -2)
    G1 = np.stack([np.stack([2 * h1 * h1p, h12p], -1), np.stack([h12p, 2 * h2 * h2p], -1)], -2)
    G2 = np.stack(
        [np.stack([2 * (h1p**2 + h1 * h1pp), h12pp], -1), np.stack([h12pp, 2 * (h2p**2 + h2 * h2pp)], -1)], -2
    )
    return G, G1, G2


def _transport_block(p: MetricProfile, t_start: float, t_end: float, steps: int, v0: np.ndarray):
    """RK4 for c' = -S c on the {E1, F1} block at ``steps`` uniform steps; returns (ts, cs)."""
    ts = np.linspace(t_start, t_end, 2 * steps + 1)  # includes half steps
    G, G1, _ = _block_series(p, ts)
    S = -0.5 * np.linalg.solve(G, G1)
    h = (t_end - t_start) / steps
    cs = np.empty((steps + 1, 2))
    c = np.asarray(v0, dtype=float)
    cs[0] = c
    for i in range(steps):
        a, m, b = S[2 * i], S[2 * i + 1], S[2 * i + 2]
        k1 = a @ c
        k2 = m @ (c + h / 2 * k1)
        k3 = m @ (c + h / 2 * k2)
        k4 = b @ (c + h * k3)
        c = c + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        cs[i + 1] = c
    if not np.all(np.isfinite(cs)):
        raise IntegrationError(f"transport blew up on [{t_end}, {t_start}] with {steps} steps")
    return ts[::2], cs


def second_variation_check(diagram: GroupDiagram | None, p: MetricProfile, tol: float = INEQ_TOL,
                           margin: float = 1e-3, steps: int = 4000, rtol: float = 1e-9) -> SecondVariationResult:
    """Transport E1 from near t = L back towards 0 and examine K(t) = R(E~, gamma', gamma', E~).

    Passing requires K >= -tol pointwise and the integral of K <= tol; then
    K vanishes, which forces h1 constant and h12 = 0 (the reduced model).
    Applicable for d >= 3 only.
    """
    if p.d < 3:
        return SecondVariationResult(True, False, note="needs d >= 3 (B- totally geodesic)")
    diagram = diagram or brieskorn_diagram(p.n, p.d)
    L = p.L
    t_hi, t_lo = L * (1 - margin), L * margin
    G0 = _block_series(p, np.array([t_hi]))[0][0]
    v0 = np.array([1.0, 0.0]) / math.sqrt(G0[0, 0])
    note = ""
    while True:
        try:
            ts, coarse = _transport_block(p, t_hi, t_lo, steps, v0)
            _, fine = _transport_block(p, t_hi, t_lo, 2 * steps, v0)
            fine = fine[::2]
            err = float(np.abs(fine - coarse).max()) / 15.0
            break
        except IntegrationError as exc:
            if margin >= 0.05:
                raise
            margin *= 2
            t_hi, t_lo = L * (1 - margin), L * margin
            note = f"limit extension: interval shrunk to margin {margin:g} after {exc}"
    cs = fine + (fine - coarse) / 15.0
    G, G1, G2 = _block_series(p, ts)
    Ginv = np.linalg.inv(G)
    Kmat = -(0.5 * G2 - 0.25 * G1 @ Ginv @ G1)
    K = np.einsum("ti,tij,tj->t", cs, Kmat, cs)
    norms = np.einsum("ti,tij,tj->t", cs, G, cs)
    order = np.argsort(ts)
    ts, K, cs = ts[order], K[order], cs[order]
    integral = float(trapezoid(K, ts))
    # orthogonality persistence: g(E~, F1) / (|E~| |F1|)
    gEF = np.einsum("ti,ti->t", cs, G[order][:, :, 1]) / np.sqrt(norms[order] * G[order][:, 1, 1])
    i_min = int(np.argmin(K))
    res = SecondVariationResult(
        passed=True,
        applicable=True,
        k_min=float(K[i_min]),
        t_min=float(ts[i_min]),
        integral=integral,
        orthogonality_defect=float(np.abs(gEF).max()),
        interval=(float(t_lo), float(t_hi)),
        steps=2 * steps,
        margin=margin,
        error_estimate=err,
        note=note,
        ts=ts,
        K=K,
    )
    full = lambda c: c[0] * diagram.unit("E1") + c[1] * diagram.unit("F1")  # noqa: E731
    if res.k_min < -tol:
        res.passed = False
        res.witness = _radial_certificate("second-variation", diagram, p, res.t_min, full(cs[i_min]), CURV_TOL,
                                          integral=integral)
        if res.witness is None:
            res.note = (res.note + "; " if res.note else "") + "pointwise K < -tol not confirmed by the engine"
    elif integral > tol:
        res.passed = False
        data = {"mode": "integral", "margin": margin, "steps": steps, "k_min": res.k_min}
        res.witness = WitnessCertificate("second-variation", res.t_min, integral, max(1e-6, 100 * err), data,
                                         note="integral of K along the parallel m1 field is positive")
    res.reduced_justified = res.passed and abs(integral) <= tol and float(np.abs(K).max()) <= math.sqrt(tol)
    return res


# -- the endgame bound -----------------------------------------------------------


@dataclass
class BoundAnalysis:
    eps: float
    ts: np.ndarray
    U: np.ndarray
    V: np.ndarray
    log_delta_prime: np.ndarray
    beta: np.ndarray
    implied_bound: float
    threshold: float
    verdict: str
    conditions_hold: bool
    tol: float
    sandwich: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return _jsonable(
            {
                "eps": self.eps,
                "implied_f1p0_lower_bound": self.implied_bound,
                "f1p0_smoothness_value": self.threshold,
                "verdict": self.verdict,
                "conditions_hold": self.conditions_hold,
                "tol": self.tol,
                "sandwich": self.sandwich,
                "diagnostics": self.diagnostics,
                "samples": {"t": self.ts[:: max(1, len(self.ts) // 20)], "beta": self.beta[:: max(1, len(self.ts) // 20)]},
            }
        )


def _with_h2_d1(jet: MetricJet, h2p: float) -> MetricJet:
    d1 = dict(jet.d1)
    d1["h2"] = h2p
    return MetricJet(jet.t, jet.v, d1, jet.d2)


def bound_terms(diagram: GroupDiagram, jet: MetricJet, a: float) -> dict:
    """Explicit remainders 1 + eta_U, 1 + eta_1, 1 + eta_2 at one parameter.

    With R(.,F1,F1,.) on span{X, Y} written as A + B delta' (exact, the
    engine is affine in h2'), the determinant equals
    ``-(a^2/16)(1+eta_1) delta + (a^2/16)(1+eta_2) f1 f1' delta'``.
    """
    v, d1 = jet.v, jet.d1
    f1, f1p, h2 = v["f1"], d1["f1"], v["h2"]
    delta = 1 - h2 * h2
    ddelta = -2 * h2 * d1["h2"]
    A = xy_form(diagram, _with_h2_d1(jet, 0.0))[0]
    # h2' = -1/(2 h2) gives delta' = 1
    B = xy_form(diagram, _with_h2_d1(jet, -0.5 / h2))[0] - A
    detA = A[0, 0] * A[1, 1] - A[0, 1] ** 2
    mixed = A[0, 0] * B[1, 1] + A[1, 1] * B[0, 0] - 2 * A[0, 1] * B[0, 1]
    detB = B[0, 0] * B[1, 1] - B[0, 1] ** 2
    one_eta1 = -16 * detA / (a * a * delta)
    one_eta2 = 16 * (mixed + detB * ddelta) / (a * a * f1 * f1p)
    lhs, rhs = cond2_sides(jet, "corrected")
    U = math.sqrt(rhs) / delta  # cond2 as (log delta)' <= U
    one_etaU = U * f1 / math.sqrt(2)
    return {
        "delta": delta,
        "ddelta": ddelta,
        "U": U,
        "one_eta_U": one_etaU,
        "one_eta_1": one_eta1,
        "one_eta_2": one_eta2,
        "V": one_eta1 / (one_eta2 * f1 * f1p),
        "beta": one_eta1 / (one_eta2 * one_etaU * math.sqrt(2)),
        "det": detA + mixed * ddelta + detB * ddelta * ddelta,
    }


def bound_analysis(p: MetricProfile, eps: float | None = None, tol: float = 0.05, points: int = 80,
                   diagram: GroupDiagram | None = None) -> BoundAnalysis:
    """Sandwich V <= (log delta)' <= U on (0, eps] and the implied bound on f1'(0).

    U comes from the E + F inequality and V from the determinant condition, both
    with explicitly computed remainders. Their ratio forces
    ``f1'(t) >= beta(t)``; ``beta`` is extrapolated to t = 0 and compared
    with the smoothness value sqrt(2)/d.
    """
    if not p.reduced:
        return _not_applicable(p, "bound analysis needs the reduced model (h1 = 1, h12 = 0)")
    p = p if p.is_normalized else normalize(p)
    diagram = diagram or brieskorn_diagram(p.n, p.d)
    eps = default_eps(p.L) if eps is None else float(eps)
    a = p.jet(0.0).v["f2"] ** 2
    ts = eps * np.geomspace(1e-3, 1.0, points)
    rows, diags = [], []
    for t in ts:
        jet = p.jet(float(t))
        if not (1 - jet.v["h2"] ** 2) > 0:
            diags.append(f"delta vanishes at t={t:.6g}: 'log(delta)' is bounded from above' clause applies")
            continue
        rows.append((t, bound_terms(diagram, jet, a)))
    if len(rows) < 5:
        return _not_applicable(p, "delta is not positive on (0, eps]", diags)
    t_arr = np.array([r[0] for r in rows])
    get = lambda k: np.array([r[1][k] for r in rows])  # noqa: E731
    U, V, beta = get("U"), get("V"), get("beta")
    dl, ddl = get("delta"), get("ddelta")
    logd = ddl / dl
    # extrapolate beta(t) -> t = 0 from the smallest samples (quadratic in t)
    k = min(len(t_arr), 12)
    coef = np.polyfit(t_arr[:k], beta[:k], 2)
    implied = float(np.polyval(coef, 0.0))
    threshold = math.sqrt(2.0) / p.d
    conditions = bool(np.all(get("det") >= -INEQ_TOL) and np.all(logd <= U * (1 + 1e-12)))
    if not conditions:
        diags.append("the E + F inequality or the determinant condition fails somewhere on (0, eps]; "
                     "the bound shows they cannot both hold")
    # integrated sandwich between the first sample and eps
    sand = {
        "t_from": float(t_arr[0]),
        "t_to": float(t_arr[-1]),
        "int_V": float(trapezoid(V, t_arr)),
        "int_U": float(trapezoid(U, t_arr)),
        "log_delta_increment": float(math.log(dl[-1] / dl[0])),
    }
    verdict = "CONTRADICTION" if implied > threshold + tol else "CONSISTENT"
    return BoundAnalysis(eps, t_arr, U, V, logd, beta, implied, threshold, verdict, conditions, tol, sand, diags)


def _not_applicable(p, reason, diags=()):
    empty = np.array([])
    return BoundAnalysis(float("nan"), empty, empty, empty, empty, empty, float("nan"), math.sqrt(2.0) / p.d,
                         "NOT-APPLICABLE", False, 0.0, {}, [reason, *diags])


# -- harmonic-polynomial family --------------------------------------------------


@dataclass
class Thm31BlockProfile:
    """Gram data consumed by the w-bound: h on the last W row, b and c on so(k).

    ``c`` scales the part of so(k) that collapses at t = 0 (the image of
    mu(so(l)) modulo mu(so(l-1))) and ``b`` its Q-complement; the other W
    rows stay orthonormal.
    """

    L: float
    h: Curve
    b: Curve
    c: Curve
    metadata: dict = field(default_factory=dict)

    def operator(self, diagram: GroupDiagram, t: float) -> MetricOperator:
        idx = diagram.block_labels
        h, hp = self.h.jet(t)[:2]
        b, bp = self.b.jet(t)[:2]
        c, cp = self.c.jet(t)[:2]
        G = np.eye(diagram.dim)
        G1 = np.zeros_like(G)
        for i in idx["W_last"]:
            G[i, i], G1[i, i] = h * h, 2 * h * hp
        rest = np.array(idx["rest"])
        Pc = collapsing_projector(diagram)
        eye = np.eye(len(rest))
        G[np.ix_(rest, rest)] = b * b * eye + (c * c - b * b) * Pc
        G1[np.ix_(rest, rest)] = 2 * b * bp * eye + 2 * (c * cp - b * bp) * Pc
        return MetricOperator.from_gram(G, G1, t=t)


def collapsing_projector(diagram: GroupDiagram) -> np.ndarray:
    """Projector (in rest coordinates) onto the complement part of mu(so(l))."""
    rows = np.array([diagram.coords(e) for e in diagram.kminus_basis])
    rest = np.array(diagram.block_labels["rest"])
    _, s, vt = np.linalg.svd(rows[:, rest])
    r = int((s > 1e-10).sum())
    return vt[:r].T @ vt[:r]


def random_block_profile(seed: int, L: float | None = None) -> Thm31BlockProfile:
    """Admissible block data: h concave, h(0)=1, h'(0)=0, h(L)=0; b > 0; c(0)=0."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 31]))
    L = float(rng.uniform(0.8, 1.6)) if L is None else float(L)
    g = rng.uniform(0.3, 1.4)  # h = 1 - g s^2 + (g - 1) s^3 is concave for g <= 1.5
    h = PolyCurve([1.0, 0.0, -g / L**2, (g - 1.0) / L**3])
    b0, b2 = rng.uniform(0.6, 1.4), rng.uniform(-0.2, 0.2)
    b = PolyCurve([b0, 0.0, b0 * b2 / L**2])
    c1 = rng.uniform(0.5, 1.5)
    c = PolyCurve([0.0, c1, 0.0, -c1 * 0.1 / L**2])
    return Thm31BlockProfile(L, h, b, c, {"seed": int(seed), "g": float(g)})


def perpendicular_rotation(diagram: GroupDiagram) -> tuple[np.ndarray, np.ndarray]:
    """a in SO(k-1) with w = 2 sum_s a_{s,k-1} E_{s,k} Q-orthogonal to k-.

    Returns (a, u) where u = column k-1 of a.
    """
    k, n = diagram.params["k"], diagram.n
    from .liealg import basis_element

    cols = [basis_element(s, k, n, exact=False) for s in range(1, k)]
    # projections of k- onto span{E_{s,k}}
    km = np.array([[float(np.sum(e.mat_part * c.mat_part)) / 2 for c in cols] for e in diagram.kminus_basis])
    _, s, vt = np.linalg.svd(km)
    r = int((s > 1e-10).sum())
    if r >= k - 1:
        raise ConfigurationError("k- projects onto the whole column; no perpendicular choice of a exists")
    u = vt[r]
    u = u / np.linalg.norm(u)
    # complete u to an orthonormal basis with u as the last column, det +1
    M = np.column_stack([u, np.eye(k - 1)])
    q, _ = np.linalg.qr(M)
    q = q[:, : k - 1]
    q = np.column_stack([q[:, 1:], q[:, 0] * np.sign(q[:, 0] @ u)])
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q, u


@dataclass
class Thm31Result:
    verdict: str
    a: np.ndarray
    q_bound: float
    log_delta_max: float
    witness: WitnessCertificate | None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return _jsonable({"verdict": self.verdict, "a": self.a, "q_bound": self.q_bound,
                          "log_delta_prime_max": self.log_delta_max,
                          "witness": None if self.witness is None else self.witness.to_dict(),
                          "details": self.details})


def thm31_certify(diagram31: GroupDiagram, block: Thm31BlockProfile, tol: float = CURV_TOL,
                  points: int = 400) -> Thm31Result:
    """The w-bound along the geodesic with w perpendicular to k-."""
    if diagram31.family != "theorem31":
        raise InputError("thm31_certify needs a theorem31 diagram")
    h0, h0p = block.h.jet(0.0)[:2]
    hL = block.h.jet(block.L)[0]
    if abs(h0 - 1) > 1e-9 or abs(h0p) > 1e-9 or abs(hL) > 1e-9:
        raise InputError(f"block profile must have h(0)=1, h'(0)=0, h(L)=0; got {h0:.3g}, {h0p:.3g}, {hL:.3g}")
    k, n = diagram31.params["k"], diagram31.n
    a, u = perpendicular_rotation(diagram31)
    w = thm31_w(a, k, n)
    w_c = diagram31.coords(w)
    perp = max(abs(float(np.sum(e.mat_part * w.mat_part)) / 2) for e in diagram31.kminus_basis)
    ts = block.L * np.geomspace(1e-4, 0.5, points)
    qs, vals, logd = [], [], []
    for t in ts:
        M = block.operator(diagram31, float(t))
        h, hp = block.h.jet(float(t))[:2]
        dl, dlp = 1 - h * h, -2 * h * hp
        qs.append(float(w_c @ M.Ginv @ w_c))
        vals.append(closed_form_thm31(diagram31, M, dl, dlp, a) / (1 + h * h) ** 2)
        logd.append(dlp / dl if dl > 0 else float("inf"))
    qs, vals, logd = np.array(qs), np.array(vals), np.array(logd)
    i = int(np.argmin(vals))
    details = {"w_perp_k_minus": perp, "column_u": u, "t_min": float(ts[i]), "min_sectional": float(vals[i])}
    cert = None
    if vals[i] < -tol:
        t = float(ts[i])
        M = block.operator(diagram31, t)
        X1, X2, Y1, Y2 = _thm31_vectors(a, k, n)
        A, B = diagram31.coords(X1 + Y2), diagram31.coords(X2 + Y1)
        engine = orbit_plane_sectional(diagram31, M, A, B)
        details["engine_sectional"] = engine
        if engine < -tol:
            data = {"mode": "thm31", "a": a.tolist(), "u": A.tolist(), "v": B.tolist()}
            cert = WitnessCertificate("thm31-bound", t, float(vals[i]), _replay_tol(vals[i]), data,
                                      note="w-bound negative for w perpendicular to k-")
    verdict = "CONTRADICTION" if cert is not None else "NONE"
    return Thm31Result(verdict, a, float(np.max(qs)), float(np.max(logd[np.isfinite(logd)])), cert, details)


def _thm31_vectors(a, k, n):
    from .liealg import AlgElement, basis_element

    full = np.eye(n)
    full[: k - 1, : k - 1] = np.asarray(a, dtype=float)
    E = lambda i, j: basis_element(i, j, n, exact=False)  # noqa: E731
    ad = lambda z: AlgElement.from_matrix(full @ z.mat_part @ full.T, exact=False)  # noqa: E731
    return ad(E(k - 1, k + 1)), ad(E(k - 1, k + 2)), E(k, k + 1), E(k, k + 2)


# -- witness search ---------------------------------------------------------------------


@dataclass
class SearchParams:
    tol: float = INEQ_TOL
    curv_tol: float = CURV_TOL
    grid: int = GRID_POINTS
    eps: float | None = None
    exhaustive: bool = False
    near_zero: float = 1e-4

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class WitnessReport:
    verdict: str
    certificate: WitnessCertificate | None
    certificates: list
    coverage: dict
    tolerances: dict
    checks: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return _jsonable(
            {
                "verdict": self.verdict,
                "certificate": None if self.certificate is None else self.certificate.to_dict(),
                "all_certificates": [c.to_dict() for c in self.certificates],
                "coverage": self.coverage,
                "tolerances": self.tolerances,
                "checks": self.checks,
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)


def _scan_planes(diagram, p, ts, params):
    """Per-t engine values for the E+F plane and the (A_r, F1) family."""
    A, B = plane_AB(diagram)

    def one(jet):
        t = jet.t
        try:
            M = metric_operator(diagram, jet)
        except DegenerateMetricError:
            return float(t), float("nan"), float("nan"), None
        hom = HomogeneousCurvature(diagram, M)
        ef = ambient_tensor(diagram, M, A, B, B, A, hom) / area2(M, A, B)
        R, S = xy_form(diagram, M, hom)
        lam, _ = most_negative_plane(R, S)
        # values inside the rounding floor are not evidence of negative curvature
        return float(t), ef, lam if lam < -roundoff_floor(R, S) else max(lam, 0.0), None

    return _map(one, p.jets(ts))


def find_witness(diagram: GroupDiagram | None, p: MetricProfile, params: SearchParams | None = None) -> WitnessReport:
    """Search the catalog in the order of the proof; return the first certificate (or all with exhaustive)."""
    params = params or SearchParams()
    diagram = diagram or brieskorn_diagram(p.n, p.d)
    tolerances = {"inequality": params.tol, "curvature": params.curv_tol, "smoothness": 1e-8}
    checks, certs = [], []
    coverage = {"planes": ["E1+F2,E2+F1", "X+rY,F1", "gamma',F1", "gamma',E~(parallel m1)"], "grid_points": 0}

    gate = smoothness_check(p, tol=1e-8)
    checks.append({"name": "smoothness", "passed": gate.passed})
    if not gate.passed:
        return WitnessReport("NOT-APPLICABLE", None, [], coverage, tolerances, checks)
    p = p if p.is_normalized else normalize(p)

    def done():
        return certs and not params.exhaustive

    def finish():
        verdict = "WITNESS" if certs else "NONE"
        return WitnessReport(verdict, certs[0] if certs else None, certs, coverage, tolerances, checks)

    sv = second_variation_check(diagram, p, tol=params.tol)
    checks.append({"name": "second-variation", "passed": sv.passed, "applicable": sv.applicable,
                   "k_min": sv.k_min, "integral": sv.integral})
    if sv.witness is not None:
        certs.append(sv.witness)
    if done():
        return finish()

    ts = scan_grid(p.L, params.grid, params.near_zero)
    coverage["grid_points"] = int(len(ts))
    coverage["t_range"] = [float(ts[0]), float(ts[-1])]
    conc = check_concavity(p, ts, params.tol, diagram)
    checks.append(conc.to_dict())
    if conc.witness is not None:
        certs.append(conc.witness)
    if done():
        return finish()

    rows = _scan_planes(diagram, p, ts, params)
    ef = np.array([r[1] for r in rows])
    lam = np.array([r[2] for r in rows])
    coverage["degenerate_points"] = int(np.isnan(ef).sum())

    for label, vals, kind in (("cond2", ef, "orbit-plane"), ("determinant", lam, "determinant")):
        finite = np.where(np.isfinite(vals), vals, np.inf)
        i = int(np.argmin(finite))
        entry = {"name": label, "min_sectional": float(finite[i]), "t_min": float(ts[i])}
        if finite[i] < -params.curv_tol:
            cert = _confirm(kind, diagram, p, ts, i, params)
            entry["passed"] = cert is None
            if cert is not None:
                certs.append(cert)
        else:
            entry["passed"] = True
        checks.append(entry)
        if done():
            return finish()

    ba = bound_analysis(p, params.eps, diagram=diagram)
    checks.append({"name": "bound-analysis", "verdict": ba.verdict, "implied_bound": ba.implied_bound})
    return finish()


def _confirm(kind, diagram, p, ts, i, params) -> WitnessCertificate | None:
    if kind == "orbit-plane":
        A, B = plane_AB(diagram)
        t = _refine(lambda s: orbit_plane_sectional(diagram, p.jet(s), A, B), ts, i, p.L)
        return _plane_certificate(kind, diagram, p, t, A, B, params.curv_tol,
                                  residual=float(check_cond2(p.jet(t), variant="corrected").residual))

    def lam_at(s):
        R, S = xy_form(diagram, p.jet(s))
        return most_negative_plane(R, S)[0]

    t = _refine(lam_at, ts, i, p.L)
    return check_determinant(p, t, params.tol, diagram).witness


# -- regularity and delta positivity diagnostics ---------------------------------


@dataclass
class RegularityReport:
    alpha: float
    eps: float
    fitted_exponent: float
    holds_on: tuple[float, float] | None
    bound_exponent: float
    note: str = ""

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


def regularity_diagnostic(p, alpha: float, eps: float | None = None, d: int | None = None,
                          points: int = 200) -> RegularityReport:
    """Does delta(t) >= t^alpha near 0?  Also fits the exponent of delta.

    ``p`` is a MetricProfile or a callable ``t -> delta(t)`` (then ``d``
    and ``eps`` are required). Informational only.
    """
    if isinstance(p, MetricProfile):
        p = p if p.is_normalized else normalize(p)
        d = p.d
        eps = default_eps(p.L) if eps is None else eps
        delta = lambda t: 1 - p.curves["h2"].jet(t)[0] ** 2  # noqa: E731
    else:
        if d is None or eps is None:
            raise InputError("callable delta needs d and eps")
        delta = p
    ts = eps * np.geomspace(1e-4, 1.0, points)
    dl = np.array([float(delta(float(t))) for t in ts])
    ok = dl >= ts**alpha
    holds = None
    if ok[0]:
        j = int(np.argmin(ok)) if not ok.all() else len(ok)
        holds = (float(ts[0]), float(ts[j - 1]))
    pos = dl > 0
    fitted = float("nan")
    if pos.sum() >= 5:
        k = max(5, int(pos.sum() // 4))
        fitted = float(np.polyfit(np.log(ts[pos][:k]), np.log(dl[pos][:k]), 1)[0])
    note = "delta >= t^alpha holds from the smallest sample" if holds else "delta < t^alpha near 0"
    return RegularityReport(float(alpha), float(eps), fitted, holds, float(d), note)


def delta_positivity_diagnostic(delta: Callable[[float], float], ddelta: Callable[[float], float], t0: float,
                                eta: float, upper: Callable[[float], float], epsilons=None) -> dict:
    """If delta(t0) = 0 the integral of (log delta)' over [t0+eps, t0+eta] diverges as eps -> 0,
    while the upper envelope stays finite there."""
    epsilons = np.geomspace(1e-1 * eta, 1e-8 * eta, 8) if epsilons is None else np.asarray(epsilons)
    integrals = [float(math.log(delta(t0 + eta)) - math.log(delta(t0 + e))) for e in epsilons]
    env = [float(upper(t0 + e)) for e in epsilons]
    bound = [float(u * (eta - e)) for u, e in zip(env, epsilons)]
    return {
        "epsilons": epsilons.tolist(),
        "log_delta_increment": integrals,
        "upper_envelope": env,
        "envelope_bound_on_increment": bound,
        "diverges": bool(integrals[-1] > integrals[0] + 5.0 and np.all(np.isfinite(env))),
        "contradiction": bool(any(i > b for i, b in zip(integrals, bound))),
    }
