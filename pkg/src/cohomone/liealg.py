"""Arithmetic in so(2) + so(n).

An element ``a I + A`` is stored as the scalar ``a`` (coefficient of the
generator ``I`` of the central so(2) factor) together with the n x n
antisymmetric matrix ``A``.  Entries are either exact ``Fraction`` values
(``exact=True``) or floats; the two modes never mix silently.

``E_ij`` (i < j, 1-based) has +1 at (i, j) and -1 at (j, i), so it sends
``e_j -> e_i`` and ``e_i -> -e_j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import InputError


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class AlgElement:
    so2_part: object
    mat_part: np.ndarray
    n: int
    exact: bool

    def __post_init__(self):
        m = self.mat_part
        if m.shape != (self.n, self.n):
            raise InputError(f"matrix part has shape {m.shape}, expected {(self.n, self.n)}")
        if self.exact:
            if m.dtype != object or not isinstance(self.so2_part, Rational):
                raise InputError("exact element needs Fraction entries")
            if any(m[i, j] != -m[j, i] for i in range(self.n) for j in range(i, self.n)):
                raise InputError("matrix part is not antisymmetric")
        else:
            if not np.allclose(m, -m.T, atol=1e-12 * max(1.0, float(np.abs(m).max(initial=0.0)))):
                raise InputError("matrix part is not antisymmetric")
        _freeze(m)

    # construction -----------------------------------------------------

    @classmethod
    def zero(cls, n: int, exact: bool = True) -> "AlgElement":
        if exact:
            return cls(Fraction(0), _fraction_zeros(n), n, True)
        return cls(0.0, np.zeros((n, n)), n, False)

    @classmethod
    def from_matrix(cls, mat, so2=0, exact: bool = True) -> "AlgElement":
        arr = np.asarray(mat, dtype=object if exact else float)
        if exact:
            arr = np.vectorize(Fraction, otypes=[object])(arr) if arr.size else arr
            return cls(Fraction(so2), arr, arr.shape[0], True)
        return cls(float(so2), arr.astype(float), arr.shape[0], False)

    @classmethod
    def so2(cls, n: int, coeff=1, exact: bool = True) -> "AlgElement":
        z = cls.zero(n, exact)
        return cls(Fraction(coeff) if exact else float(coeff), z.mat_part.copy(), n, exact)

    def to_float(self) -> "AlgElement":
        if not self.exact:
            return self
        return AlgElement(float(self.so2_part), self.mat_part.astype(float), self.n, False)

    # arithmetic -------------------------------------------------------

    def _check(self, other: "AlgElement") -> None:
        if not isinstance(other, AlgElement):
            raise InputError("expected an AlgElement")
        if other.n != self.n:
            raise InputError(f"mismatched sizes so({self.n}) and so({other.n})")
        if other.exact != self.exact:
            raise InputError("cannot mix exact and floating elements")

    def __add__(self, other: "AlgElement") -> "AlgElement":
        self._check(other)
        return AlgElement(self.so2_part + other.so2_part, self.mat_part + other.mat_part, self.n, self.exact)

    def __sub__(self, other: "AlgElement") -> "AlgElement":
        self._check(other)
        return AlgElement(self.so2_part - other.so2_part, self.mat_part - other.mat_part, self.n, self.exact)

    def __neg__(self) -> "AlgElement":
        return AlgElement(-self.so2_part, -self.mat_part, self.n, self.exact)

    def scale(self, c) -> "AlgElement":
        if self.exact:
            if not isinstance(c, Rational):
                raise InputError("exact elements scale by rationals only")
            c = Fraction(c)
        else:
            c = float(c)
        return AlgElement(self.so2_part * c, self.mat_part * c, self.n, self.exact)

    def __mul__(self, c) -> "AlgElement":
        return self.scale(c)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        if self.exact:
            return self.so2_part == 0 and all(x == 0 for x in self.mat_part.flat)
        return self.so2_part == 0.0 and not self.mat_part.any()

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlgElement) or other.n != self.n or other.exact != self.exact:
            return NotImplemented
        return (self - other).is_zero()

    def __repr__(self) -> str:
        kind = "exact" if self.exact else "float"
        return f"AlgElement(so2={self.so2_part}, n={self.n}, {kind}, mat={self.mat_part.tolist()})"

    def upper_coords(self) -> list:
        """Coordinates (so2, A_12, A_13, ..., A_{n-1,n}) in the standard basis."""
        m = self.mat_part
        return [self.so2_part] + [m[i, j] for i in range(self.n) for j in range(i + 1, self.n)]


def _fraction_zeros(n: int) -> np.ndarray:
    arr = np.empty((n, n), dtype=object)
    arr.fill(Fraction(0))
    return arr


def basis_element(i: int, j: int, n: int, exact: bool = True) -> AlgElement:
    """The standard generator ``E_ij`` of so(n), 1-based with ``i < j``."""
    if not (1 <= i < j <= n):
        raise InputError(f"need 1 <= i < j <= n, got i={i}, j={j}, n={n}")
    if exact:
        m = _fraction_zeros(n)
        m[i - 1, j - 1] = Fraction(1)
        m[j - 1, i - 1] = Fraction(-1)
        return AlgElement(Fraction(0), m, n, True)
    m = np.zeros((n, n))
    m[i - 1, j - 1] = 1.0
    m[j - 1, i - 1] = -1.0
    return AlgElement(0.0, m, n, False)


def bracket(a: AlgElement, b: AlgElement) -> AlgElement:
    a._check(b)
    prod = a.mat_part.dot(b.mat_part) - b.mat_part.dot(a.mat_part)
    zero = Fraction(0) if a.exact else 0.0
    return AlgElement(zero, prod, a.n, a.exact)


@dataclass(frozen=True)
class QFormParams:
    """Weights of ``Q(a+A, b+B) = d^2 a b - tr(A B)/2``."""

    d: int
    n: int

    def __post_init__(self):
        if self.d < 1 or self.n < 2:
            raise InputError(f"need d >= 1 and n >= 2, got d={self.d}, n={self.n}")


def q_inner(a: AlgElement, b: AlgElement, p: QFormParams):
    a._check(b)
    if p.n != a.n:
        raise InputError(f"form is for so({p.n}), elements are in so({a.n})")
    # for antisymmetric A, B: -tr(AB)/2 = sum_ij A_ij B_ij / 2
    tr = (a.mat_part * b.mat_part).sum()
    if a.exact:
        return Fraction(p.d * p.d) * a.so2_part * b.so2_part + tr / 2
    return float(p.d * p.d) * a.so2_part * b.so2_part + 0.5 * float(tr)
