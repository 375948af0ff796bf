"""Engine self-checks run by ``cohomone verify-engine``.

Each suite returns a :class:`SuiteResult`; the suites are cheap enough to
run on every invocation and use a fixed seed so reruns agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curvature import (
    HomogeneousCurvature,
    MetricOperator,
    closed_form_EF,
    closed_form_XF1,
    engine_XF1,
    orbit_plane_curvature,
    orbit_plane_sectional,
    plane_AB,
    radial_sectional,
    rational_rotation,
    thm31_w,
    thm31_w_expected,
)
from .diagram import bi_invariant_diagram, brieskorn_diagram
from .errors import InputError
from .liealg import AlgElement, QFormParams, bracket, q_inner
from .metricmodel import MetricJet
from .presets import preset_round

SUITES = ("biinvariant", "sphere", "closed-form", "brackets")


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checks: int
    worst: float
    tol: float
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "checks": int(self.checks),
                "worst": float(self.worst), "tol": float(self.tol), "notes": list(self.notes)}

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.checks} checks, worst {self.worst:.3e} (tol {self.tol:g})"


def _random_skew(n: int, rng) -> AlgElement:
    a = rng.normal(size=(n, n))
    return AlgElement.from_matrix(a - a.T, exact=False)


def suite_biinvariant(planes: int = 100, seed: int = 0, tol: float = 1e-10) -> SuiteResult:
    """sec(X, Y) = 1/4 |[X, Y]|^2 / area for Q on SO(3) and SO(4)."""
    rng = np.random.default_rng(seed)
    worst, count = 0.0, 0
    for n in (3, 4):
        D = bi_invariant_diagram(n)
        M = MetricOperator.from_gram(np.eye(D.dim))
        hom = HomogeneousCurvature(D, M)
        q = QFormParams(1, n)
        for _ in range(planes):
            x, y = rng.normal(size=D.dim), rng.normal(size=D.dim)
            br = bracket(D.element(x), D.element(y))
            want = 0.25 * float(q_inner(br, br, q)) / (x @ x * (y @ y) - (x @ y) ** 2)
            got = hom.sectional(x, y)
            worst = max(worst, abs(got - want) / max(abs(want), 1e-300))
            count += 1
    return SuiteResult("biinvariant", worst <= tol, count, worst, tol)


def suite_sphere(planes: int = 200, seed: int = 0, tol: float = 1e-6, n: int = 4) -> SuiteResult:
    """The round preset has sectional curvature 1 on orbit-tangent and radial planes."""
    rng = np.random.default_rng(seed)
    p = preset_round(n)
    D = brieskorn_diagram(n, 1)
    worst, count = 0.0, 0
    ts = rng.uniform(0.05, 0.95, size=planes) * p.L
    for i, t in enumerate(ts):
        jet = p.jet(float(t))
        u = rng.normal(size=D.dim)
        if i % 2:
            val = radial_sectional(D, jet, u)
        else:
            val = orbit_plane_sectional(D, jet, u, rng.normal(size=D.dim))
        worst = max(worst, abs(val - 1.0))
        count += 1
    return SuiteResult("sphere", worst <= tol, count, worst, tol)


def random_reduced_jet(rng, t: float = 0.3) -> MetricJet:
    """A positive definite reduced-model jet (h1 = 1, h12 = 0)."""
    f1, f2 = rng.uniform(0.3, 1.5, size=2)
    return MetricJet.from_values(
        t=t, f1=f1, f2=f2, f12=rng.uniform(-0.5, 0.5) * f1 * f2, h2=rng.uniform(0.2, 1.0),
        **{f"{k}_d1": rng.normal() for k in ("f1", "f2", "f12", "h2")},
        **{f"{k}_d2": rng.normal() for k in ("f1", "f2", "f12", "h2")},
    )


def suite_closed_form(jets: int = 100, seed: int = 0, tol: float = 1e-8, variant: str = "corrected",
                      rotations: int = 10) -> SuiteResult:
    """Engine against the reduced-model closed forms, plus the exact w identity."""
    rng = np.random.default_rng(seed)
    worst, count, notes = 0.0, 0, []
    for _ in range(jets):
        jet = random_reduced_jet(rng)
        D = brieskorn_diagram(int(rng.integers(4, 7)), int(rng.integers(3, 6)))
        A, B = plane_AB(D)
        got = np.concatenate([[orbit_plane_curvature(D, jet, A, B)], engine_XF1(D, jet)[np.triu_indices(2)]])
        want = np.concatenate([[closed_form_EF(jet, variant)], closed_form_XF1(jet, variant)[np.triu_indices(2)]])
        rel = np.abs(got - want) / np.maximum(np.abs(want), 1.0)
        worst = max(worst, float(rel.max()))
        count += len(rel)
    exact_ok = True
    for k in (5, 7, 9):
        for _ in range(rotations):
            a = rational_rotation(k - 1, rng)
            exact_ok &= thm31_w(a, k, k + 2) == thm31_w_expected(a, k, k + 2)
            count += 1
    if not exact_ok:
        notes.append("w identity failed in exact arithmetic")
    return SuiteResult("closed-form", worst <= tol and exact_ok, count, worst, tol, notes)


def suite_brackets(samples: int = 50, seed: int = 0, tol: float = 1e-12) -> SuiteResult:
    """Jacobi identity, antisymmetry and ad-invariance of Q on random elements."""
    rng = np.random.default_rng(seed)
    worst, count = 0.0, 0
    for _ in range(samples):
        n = int(rng.integers(3, 7))
        d = int(rng.integers(1, 6))
        q = QFormParams(d, n)
        x, y, z = (_random_skew(n, rng) + AlgElement.so2(n, rng.normal(), exact=False) for _ in range(3))
        jac = bracket(x, bracket(y, z)) + bracket(y, bracket(z, x)) + bracket(z, bracket(x, y))
        anti = bracket(x, y) + bracket(y, x)
        inv = float(q_inner(bracket(x, y), z, q)) + float(q_inner(y, bracket(x, z), q))
        scale = max(1.0, float(np.abs(np.asarray(x.mat_part, dtype=float)).max())) ** 3
        vals = [np.abs(np.asarray(jac.mat_part, dtype=float)).max(), np.abs(np.asarray(anti.mat_part, dtype=float)).max(),
                abs(inv)]
        worst = max(worst, max(vals) / scale)
        count += 3
    return SuiteResult("brackets", worst <= tol, count, worst, tol)


_RUNNERS = {
    "biinvariant": suite_biinvariant,
    "sphere": suite_sphere,
    "closed-form": suite_closed_form,
    "brackets": suite_brackets,
}


def run_suites(names=None, seed: int = 0) -> list[SuiteResult]:
    names = list(SUITES) if not names else list(names)
    unknown = [n for n in names if n not in _RUNNERS]
    if unknown:
        raise InputError(f"unknown suites {unknown}; choose from {list(SUITES)}")
    return [_RUNNERS[name](seed=seed) for name in names]
