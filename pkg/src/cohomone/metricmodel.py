"""Invariant metrics on the Brieskorn family as six profile functions.

Along the normal geodesic the metric is ``dt^2 + g_t`` with

    g_t(X,X) = f1^2, g_t(Y,Y) = f2^2, g_t(X,Y) = f12,
    g_t(E_i,E_i) = h1^2, g_t(F_i,F_i) = h2^2, g_t(E_i,F_i) = h12,

and all other products of the basis zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np
from numpy.polynomial import polynomial as P

from .curves import Curve, PolyCurve, constant, curve_from_dict
from .errors import DegenerateMetricError, GenerationError, InputError

FUNCTIONS = ("f1", "f2", "f12", "h1", "h2", "h12")
DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class MetricJet:
    t: float
    v: Mapping[str, float]
    d1: Mapping[str, float]
    d2: Mapping[str, float]

    @classmethod
    def from_values(cls, t=0.5, **kw) -> "MetricJet":
        """Build a jet from keyword values like ``f1=0.3, h2_d1=-0.2``.

        Missing entries default to the reduced model: h1 = 1 and all else 0
        except f1 = f2 = h2 = 1.
        """
        base = {"f1": 1.0, "f2": 1.0, "f12": 0.0, "h1": 1.0, "h2": 1.0, "h12": 0.0}
        v = {k: float(kw.pop(k, base[k])) for k in FUNCTIONS}
        d1 = {k: float(kw.pop(k + "_d1", 0.0)) for k in FUNCTIONS}
        d2 = {k: float(kw.pop(k + "_d2", 0.0)) for k in FUNCTIONS}
        if kw:
            raise InputError(f"unknown jet entries {sorted(kw)}")
        return cls(float(t), v, d1, d2)


@dataclass(frozen=True, eq=False)
class MetricProfile:
    n: int
    d: int
    L: float
    curves: Mapping[str, Curve]
    reduced: bool = False
    family: str = "brieskorn"
    metadata: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        missing = set(FUNCTIONS) - set(self.curves)
        if missing:
            raise InputError(f"profile lacks functions {sorted(missing)}")
        if not self.L > 0:
            raise InputError("geodesic length L must be positive")

    def jet(self, t: float) -> MetricJet:
        v, d1, d2 = {}, {}, {}
        for name in FUNCTIONS:
            a, b, c = self.curves[name].jet(t)
            v[name], d1[name], d2[name] = float(a), float(b), float(c)
        return MetricJet(float(t), v, d1, d2)

    def jets(self, ts) -> list[MetricJet]:
        """Jets on a whole grid, evaluating each curve once on the array."""
        ts = np.asarray(ts, dtype=float)
        cols = {name: self.values(name, ts) for name in FUNCTIONS}
        out = []
        for i, t in enumerate(ts):
            v = {k: float(c[0][i]) for k, c in cols.items()}
            d1 = {k: float(c[1][i]) for k, c in cols.items()}
            d2 = {k: float(c[2][i]) for k, c in cols.items()}
            out.append(MetricJet(float(t), v, d1, d2))
        return out

    def values(self, name: str, ts) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        ts = np.asarray(ts, dtype=float)
        jet = self.curves[name].jet(ts)
        return tuple(np.broadcast_to(np.asarray(c, dtype=float), ts.shape).copy() for c in jet)

    def grid(self, points: int = 1000, margin: float = 0.0) -> np.ndarray:
        return np.linspace(margin * self.L, (1.0 - margin) * self.L, points)

    def positive_definite_on(self, ts) -> tuple[bool, float | None]:
        """Check both 2x2 blocks on the given parameters; returns (ok, first bad t)."""
        for t in ts:
            j = self.jet(t)
            v = j.v
            if v["f1"] ** 2 * v["f2"] ** 2 - v["f12"] ** 2 <= 0 or v["h1"] ** 2 * v["h2"] ** 2 - v["h12"] ** 2 <= 0:
                return False, float(t)
        return True, None

    @property
    def is_normalized(self) -> bool:
        return abs(self.jet(0.0).v["h1"] - 1.0) <= 1e-12

    # serialization ------------------------------------------------------

    def to_dict(self, knots: int = 2001) -> dict:
        return {
            "family": self.family,
            "n": self.n,
            "d": self.d,
            "L": self.L,
            "functions": {k: self.curves[k].to_dict((0.0, self.L), knots) for k in FUNCTIONS},
            "reduced": self.reduced,
        }

    def to_json(self, knots: int = 2001) -> str:
        return json.dumps(self.to_dict(knots), indent=1, sort_keys=True)


class ProfileFormatError(InputError):
    pass


def profile_from_dict(doc: dict) -> MetricProfile:
    for key in ("n", "d", "L", "functions"):
        if key not in doc:
            raise ProfileFormatError(f"missing field '{key}'")
    curves = {}
    for name in FUNCTIONS:
        if name not in doc["functions"]:
            raise ProfileFormatError(f"missing function 'functions.{name}'")
        try:
            curves[name] = curve_from_dict(doc["functions"][name])
        except (KeyError, ValueError, TypeError) as exc:
            raise ProfileFormatError(f"bad function 'functions.{name}': {exc}") from exc
    return MetricProfile(
        n=int(doc["n"]),
        d=int(doc["d"]),
        L=float(doc["L"]),
        curves=curves,
        reduced=bool(doc.get("reduced", False)),
        family=doc.get("family", "brieskorn"),
    )


def load_profile(path) -> MetricProfile:
    with open(path) as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProfileFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return profile_from_dict(doc)


def save_profile(profile: MetricProfile, path, knots: int = 2001) -> None:
    with open(path, "w") as fh:
        fh.write(profile.to_json(knots))
        fh.write("\n")


# -- smoothness -------------------------------------------------------------


@dataclass(frozen=True)
class Clause:
    name: str
    actual: float
    required: float
    residual: float
    passed: bool
    applicable: bool = True

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class SmoothnessReport:
    d: int
    tol: float
    clauses: tuple[Clause, ...]
    positive_definite: bool
    first_degenerate_t: float | None
    f1_slope_target: float

    @property
    def passed(self) -> bool:
        return self.positive_definite and all(c.passed for c in self.clauses if c.applicable)

    def clause(self, name: str) -> Clause:
        return next(c for c in self.clauses if c.name == name)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "d": self.d,
            "tol": self.tol,
            "f1_slope_target": self.f1_slope_target,
            "positive_definite": self.positive_definite,
            "first_degenerate_t": self.first_degenerate_t,
            "clauses": [c.to_dict() for c in self.clauses],
        }


def smoothness_check(p: MetricProfile, tol: float = DEFAULT_TOL, grid_points: int = 1000) -> SmoothnessReport:
    """Evaluate the boundary conditions at t = 0 and t = L.

    The clauses ``h1'(0) = h2'(0) = h12'(0) = 0`` come from B- being totally
    geodesic, which holds only for d >= 3; for d = 1, 2 they are reported
    but marked not applicable.
    """
    j0, jL = p.jet(0.0), p.jet(p.L)
    target = math.sqrt(2.0) / p.d
    geodesic_b = p.d >= 3
    spec = [
        ("f1(0)=0", j0.v["f1"], 0.0, True),
        ("f1'(0)=sqrt2/d", j0.d1["f1"], target, True),
        ("f12(0)=0", j0.v["f12"], 0.0, True),
        ("f12'(0)=0", j0.d1["f12"], 0.0, True),
        ("h1(0)=h2(0)", j0.v["h1"] - j0.v["h2"], 0.0, True),
        ("h1'(0)=0", j0.d1["h1"], 0.0, geodesic_b),
        ("h2'(0)=0", j0.d1["h2"], 0.0, geodesic_b),
        ("h12(0)=0", j0.v["h12"], 0.0, True),
        ("h12'(0)=0", j0.d1["h12"], 0.0, geodesic_b),
        ("h1'(L)=0", jL.d1["h1"], 0.0, True),
        ("h2(L)=0", jL.v["h2"], 0.0, True),
    ]
    clauses = []
    for name, actual, required, applicable in spec:
        res = abs(actual - required)
        clauses.append(Clause(name, float(actual), float(required), float(res), bool(res <= tol), applicable))
    pd_ok, bad_t = p.positive_definite_on(p.grid(grid_points + 2)[1:-1])
    return SmoothnessReport(p.d, tol, tuple(clauses), pd_ok, bad_t, target)


# -- normalization ----------------------------------------------------------


def normalize(p: MetricProfile) -> MetricProfile:
    """Rescale so that h1(0) = 1 (multiplying the metric by a constant)."""
    h10 = p.jet(0.0).v["h1"]
    if not h10 > 0:
        raise DegenerateMetricError(f"h1(0) = {h10} is not positive")
    a = 1.0 / h10
    if a == 1.0:
        return p
    curves = {k: c.scaled(a) for k, c in p.curves.items()}
    meta = dict(p.metadata)
    meta["normalized_by"] = a * float(meta.get("normalized_by", 1.0))
    return replace(p, L=a * p.L, curves=curves, metadata=meta)


# -- randomized admissible profiles -----------------------------------------


def _poly_in_s(coeffs_s, L):
    """Polynomial in t from coefficients in s = t / L."""
    return PolyCurve([c / L**k for k, c in enumerate(coeffs_s)])


def _h2_coeffs(g: float, L: float) -> list[float]:
    """1 - g s^2 + a3 s^3 + a4 s^4 + a5 s^5 with h2 = 0, dh2/dt = -1, h2'' = 0 at s = 1."""
    lhs = np.array([[1.0, 1.0, 1.0], [3.0, 4.0, 5.0], [6.0, 12.0, 20.0]])
    rhs = np.array([g - 1.0, 2 * g - L, 2 * g])
    a3, a4, a5 = np.linalg.solve(lhs, rhs)
    return [1.0, 0.0, -g, a3, a4, a5]


def random_admissible(n: int, d: int, seed: int, ansatz: str = "reduced", max_tries: int = 50) -> MetricProfile:
    """A polynomial profile satisfying every boundary clause by construction.

    ``ansatz`` is ``"reduced"`` (h1 = 1, h12 = 0) or ``"general"`` (h1 and
    h12 perturbed by terms vanishing to second order at both ends).  Also
    imposed, so that the metric closes up at t = L instead of having a
    conical singularity there: h2'(L) = -1, h2''(L) = 0,
    f1'(L) = f2'(L) = f12'(L) = 0, h12(L) = h12'(L) = 0, and
    f1(L) = f2(L) = r with f12(L) = r^2 - h1(L)^2 (the metric on
    span{E_12, E_1j} is a multiple of Q at B+, as Ad(K+)-invariance
    requires). Profiles whose h2 is not concave and decreasing are
    resampled.
    """
    if d < 3 or n < 4:
        raise InputError(f"need d >= 3 and n >= 4, got n={n}, d={d}")
    if ansatz not in ("reduced", "general"):
        raise InputError(f"unknown ansatz {ansatz!r}")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), n, d]))
    check = np.linspace(0.0, 1.0, 1002)[1:-1]
    for _ in range(max_tries):
        L = float(rng.uniform(1.2, 2.0))
        slope = math.sqrt(2.0) / d
        r = rng.uniform(0.85, 1.3)  # common value of f1, f2 at t = L
        c0 = rng.uniform(0.6, 1.4)
        g1, g2, g3 = rng.uniform(-0.3, 0.3, size=3)
        hermite = np.array([0.0, 0.0, 3.0, -2.0])  # 0 -> 1 with zero slopes
        bump = P.polymul([0.0, 0.0, 1.0], P.polypow([1.0, -1.0], 2))  # s^2 (1 - s)^2
        ls = L * slope
        f1 = _poly_in_s(P.polyadd([0.0, ls, 3 * r - 2 * ls, ls - 2 * r], g1 * bump), L)
        f2 = _poly_in_s(P.polyadd(P.polyadd([c0], (r - c0) * hermite), g2 * bump), L)
        f12 = _poly_in_s(P.polyadd((r * r - 1.0) * hermite, g3 * bump), L)
        h2 = _poly_in_s(_h2_coeffs(rng.uniform(0.6, 1.6), L), L)
        if ansatz == "general":
            beta = rng.uniform(0.1, 0.4) * rng.choice([-1.0, 1.0])
            kappa = rng.uniform(0.05, 0.2) * rng.choice([-1.0, 1.0])
            h1 = _poly_in_s(P.polyadd([1.0], beta * bump), L)
            h12 = _poly_in_s(kappa * bump, L)
            reduced = False
        else:
            h1, h12, reduced = constant(1.0), constant(0.0), True
        prof = MetricProfile(
            n=n,
            d=d,
            L=L,
            curves={"f1": f1, "f2": f2, "f12": f12, "h1": h1, "h2": h2, "h12": h12},
            reduced=reduced,
            metadata={"seed": int(seed), "ansatz": ansatz},
        )
        _, h2p, h2pp = h2.jet(check * L)
        if (
            prof.positive_definite_on(check * L)[0]
            and np.all(h2p < 0)
            and np.all(h2pp <= 0)
            and all(prof.curves["f1"](t) > 0 and prof.curves["h1"](t) > 0 for t in check * L)
        ):
            return prof
    raise GenerationError(f"no positive definite profile after {max_tries} tries (n={n}, d={d}, seed={seed})")


def solve_t0(d: int) -> float:
    """The positive root of t^d + t^2 = 1 (the range of |z0|), by bisection."""
    lo, hi = 0.0, 1.0
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        if mid**d + mid**2 < 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
