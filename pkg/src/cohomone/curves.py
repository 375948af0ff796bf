"""One-variable curves with exact first and second derivatives."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.interpolate import BPoly, CubicSpline


class Curve:
    kind = "abstract"

    def jet(self, t):
        """Return ``(value, first derivative, second derivative)``."""
        raise NotImplementedError

    def __call__(self, t):
        return self.jet(t)[0]

    def scaled(self, a: float) -> "Curve":
        """The curve ``t -> a * c(t / a)``."""
        return ScaledCurve(self, a)

    def to_dict(self, domain: tuple[float, float] | None = None, knots: int = 2001) -> dict:
        if domain is None:
            raise ValueError(f"{self.kind} curves are stored by sampling; pass a domain")
        return sample_hermite(self, domain, knots).to_dict()


class PolyCurve(Curve):
    kind = "poly"

    def __init__(self, coeffs: Sequence[float]):
        self.coeffs = np.array(coeffs, dtype=float)
        self._d1 = P.polyder(self.coeffs) if len(self.coeffs) > 1 else np.zeros(1)
        self._d2 = P.polyder(self.coeffs, 2) if len(self.coeffs) > 2 else np.zeros(1)

    def jet(self, t):
        return P.polyval(t, self.coeffs), P.polyval(t, self._d1), P.polyval(t, self._d2)

    def scaled(self, a: float) -> "PolyCurve":
        powers = a ** (1.0 - np.arange(len(self.coeffs)))
        return PolyCurve(self.coeffs * powers)

    def to_dict(self, domain=None, knots=2001) -> dict:
        return {"type": "poly", "coeffs": [float(c) for c in self.coeffs]}


class HermiteCurve(Curve):
    """Piecewise Hermite interpolant (cubic, or quintic when ``derivs2`` is given)."""

    kind = "spline"

    def __init__(self, knots, values, derivs=None, derivs2=None):
        self.knots = np.asarray(knots, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.derivs = None if derivs is None else np.asarray(derivs, dtype=float)
        self.derivs2 = None if derivs2 is None else np.asarray(derivs2, dtype=float)
        if self.derivs is None:
            self._p = CubicSpline(self.knots, self.values)
        else:
            cols = [self.values, self.derivs] + ([self.derivs2] if self.derivs2 is not None else [])
            self._p = BPoly.from_derivatives(self.knots, np.column_stack(cols))
        self._p1 = self._p.derivative()
        self._p2 = self._p.derivative(2)

    def jet(self, t):
        return self._p(t), self._p1(t), self._p2(t)

    def scaled(self, a: float) -> "HermiteCurve":
        return HermiteCurve(
            self.knots * a,
            self.values * a,
            None if self.derivs is None else self.derivs.copy(),
            None if self.derivs2 is None else self.derivs2 / a,
        )

    def to_dict(self, domain=None, knots=2001) -> dict:
        out = {"type": "spline", "knots": self.knots.tolist(), "values": self.values.tolist()}
        if self.derivs is not None:
            out["derivs"] = self.derivs.tolist()
        if self.derivs2 is not None:
            out["derivs2"] = self.derivs2.tolist()
        return out


class ClosedFormCurve(Curve):
    kind = "closed"

    def __init__(self, fn: Callable, name: str = ""):
        self.fn = fn
        self.name = name

    def jet(self, t):
        return self.fn(t)


class ScaledCurve(Curve):
    kind = "scaled"

    def __init__(self, base: Curve, a: float):
        self.base = base
        self.a = float(a)

    def jet(self, t):
        v, d1, d2 = self.base.jet(np.asarray(t) / self.a)
        return self.a * v, d1, d2 / self.a


def constant(c: float) -> PolyCurve:
    return PolyCurve([c])


def sample_hermite(curve: Curve, domain: tuple[float, float], knots: int = 2001) -> HermiteCurve:
    ts = np.linspace(domain[0], domain[1], knots)
    vals, d1, d2 = (np.array([np.asarray(x, dtype=float) for x in comp]) for comp in _jets(curve, ts))
    return HermiteCurve(ts, vals, d1, d2)


def _jets(curve: Curve, ts):
    out = [curve.jet(float(t)) for t in ts]
    return [np.array([o[i] for o in out], dtype=float) for i in range(3)]


def curve_from_dict(doc: dict) -> Curve:
    kind = doc.get("type")
    if kind == "poly":
        return PolyCurve(doc["coeffs"])
    if kind == "spline":
        knots, values = doc["knots"], doc["values"]
        if len(knots) != len(values) or len(knots) < 2:
            raise ValueError("spline needs matching 'knots' and 'values' of length >= 2")
        for key in ("derivs", "derivs2"):
            if key in doc and len(doc[key]) != len(knots):
                raise ValueError(f"spline '{key}' length differs from knots")
        return HermiteCurve(knots, values, doc.get("derivs"), doc.get("derivs2"))
    raise ValueError(f"unknown curve type {kind!r}")
