"""Class-one representations of (SO(l), SO(l-1)) on harmonic polynomials.

``harmonic_rep(l, m)`` builds the representation ``mu_m`` of so(l) on the
homogeneous harmonic polynomials of degree m in l variables, entirely in
rational arithmetic.  The basis is orthogonal for the Bombieri form
(monomials orthogonal, ``|x^a|^2 = a! / |a|!``), under which the operators
``x_i d_j - x_j d_i`` are skew-adjoint.  The SO(l-1)-fixed zonal harmonic
is placed last.

``check_theorem31_conditions`` evaluates the four hypotheses of the
non-negative curvature obstruction for such a representation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from . import _rational as rat
from .errors import InputError, ResourceError

MAX_MONOMIALS = 4000
MAX_DIM = 120

Monomial = tuple[int, ...]


def harmonic_dimension(ell: int, m: int) -> int:
    if m < 2:
        return math.comb(m + ell - 1, ell - 1)
    return math.comb(m + ell - 1, ell - 1) - math.comb(m + ell - 3, ell - 1)


def _monomials(ell: int, m: int) -> list[Monomial]:
    out = []
    for combo in itertools.combinations_with_replacement(range(ell), m):
        exps = [0] * ell
        for c in combo:
            exps[c] += 1
        out.append(tuple(exps))
    out.sort(reverse=True)
    return out


def _bombieri_weight(alpha: Monomial) -> Fraction:
    num = 1
    for a in alpha:
        num *= math.factorial(a)
    return Fraction(num, math.factorial(sum(alpha)))


def _rotation_operator(i: int, j: int, monos: list[Monomial]) -> list[list[Fraction]]:
    """Matrix of ``x_i d_j - x_j d_i`` (0-based) on the monomial basis."""
    index = {a: k for k, a in enumerate(monos)}
    size = len(monos)
    mat = rat.zeros(size, size)
    for col, a in enumerate(monos):
        if a[j] > 0:
            b = list(a)
            b[j] -= 1
            b[i] += 1
            mat[index[tuple(b)]][col] += a[j]
        if a[i] > 0:
            b = list(a)
            b[i] -= 1
            b[j] += 1
            mat[index[tuple(b)]][col] -= a[i]
    return mat


def _laplacian(ell: int, m: int, monos: list[Monomial]) -> list[list[Fraction]]:
    lower = _monomials(ell, m - 2)
    index = {a: k for k, a in enumerate(lower)}
    mat = rat.zeros(len(lower), len(monos))
    for col, a in enumerate(monos):
        for v in range(ell):
            if a[v] >= 2:
                b = list(a)
                b[v] -= 2
                mat[index[tuple(b)]][col] += a[v] * (a[v] - 1)
    return mat


def _apply(mat, vec):
    return [sum((row[k] * vec[k] for k in range(len(vec)) if row[k]), Fraction(0)) for row in mat]


@dataclass(frozen=True, eq=False)
class RepData:
    """A representation of so(l) by rational k x k matrices.

    ``generators[(i, j)]`` is the image of ``E_ij`` (1-based, i < j).  The
    matrices are skew-adjoint for the diagonal inner product ``gram``; when
    ``gram`` is all ones they are antisymmetric.
    """

    ell: int
    m: int | None
    k: int
    generators: Mapping[tuple[int, int], list[list[Fraction]]]
    gram: tuple[Fraction, ...]
    basis_description: tuple[dict, ...] = field(default=())

    @classmethod
    def from_generators(cls, ell: int, mats: Mapping[tuple[int, int], object]) -> "RepData":
        """Wrap externally supplied antisymmetric generator images."""
        conv = {}
        k = None
        for key, mat in mats.items():
            arr = [[Fraction(x) for x in row] for row in mat]
            k = len(arr)
            conv[tuple(key)] = arr
        expected = {(i, j) for i in range(1, ell + 1) for j in range(i + 1, ell + 1)}
        if set(conv) != expected:
            raise InputError(f"need images for every E_ij of so({ell})")
        return cls(ell, None, k, conv, tuple(Fraction(1) for _ in range(k)))

    def float_images(self) -> dict[tuple[int, int], np.ndarray]:
        """Images in the orthonormal basis obtained by normalizing ``gram``."""
        s = np.sqrt(np.array([float(g) for g in self.gram]))
        out = {}
        for key, mat in self.generators.items():
            arr = np.array([[float(x) for x in row] for row in mat])
            out[key] = (s[:, None] * arr) / s[None, :]
        return out

    def skew_defect(self) -> list[tuple[int, int]]:
        """Generators whose images fail exact skew-adjointness."""
        bad = []
        for key, mat in self.generators.items():
            for a in range(self.k):
                for b in range(self.k):
                    if self.gram[a] * mat[a][b] + self.gram[b] * mat[b][a] != 0:
                        bad.append(key)
                        break
                else:
                    continue
                break
        return bad


def harmonic_rep(ell: int, m: int) -> RepData:
    if ell < 3 or m < 1:
        raise InputError(f"need l >= 3 and m >= 1, got l={ell}, m={m}")
    k = harmonic_dimension(ell, m)
    nmono = math.comb(m + ell - 1, ell - 1)
    if nmono > MAX_MONOMIALS or k > MAX_DIM:
        raise ResourceError(
            f"(l, m) = ({ell}, {m}) needs {nmono} monomials and k = {k}; "
            f"limits are {MAX_MONOMIALS} monomials and k <= {MAX_DIM}"
        )
    monos = _monomials(ell, m)
    weights = [_bombieri_weight(a) for a in monos]

    if m >= 2:
        harmonics = rat.nullspace(_laplacian(ell, m, monos), len(monos))
    else:
        harmonics = [[Fraction(int(i == j)) for i in range(len(monos))] for j in range(len(monos))]
    assert len(harmonics) == k

    ops = {
        (i + 1, j + 1): _rotation_operator(i, j, monos)
        for i in range(ell)
        for j in range(i + 1, ell)
    }

    def inner(p, q):
        return sum((w * a * b for w, a, b in zip(weights, p, q) if a and b), Fraction(0))

    # zonal harmonic: joint kernel of so(l-1) acting on the harmonic span
    sub_ops = [op for (i, j), op in ops.items() if j < ell]
    coeff_rows = []
    for op in sub_ops:
        images = [_apply(op, h) for h in harmonics]
        coeff_rows.extend([[img[r] for img in images] for r in range(len(monos))])
    fixed = rat.nullspace(coeff_rows, k)
    if len(fixed) != 1:
        raise ArithmeticError(f"expected a unique zonal harmonic, found {len(fixed)}")
    zonal = [sum((c * h[r] for c, h in zip(fixed[0], harmonics)), Fraction(0)) for r in range(len(monos))]

    # Gram-Schmidt with the zonal vector forced to the end
    basis: list[list[Fraction]] = []
    zz = inner(zonal, zonal)
    for h in harmonics:
        v = list(h)
        c = inner(v, zonal) / zz
        v = [x - c * z for x, z in zip(v, zonal)]
        for b in basis:
            c = inner(v, b) / inner(b, b)
            v = [x - c * y for x, y in zip(v, b)]
        if any(v):
            basis.append(v)
    basis.append(zonal)
    assert len(basis) == k
    norms = [inner(b, b) for b in basis]

    gens = {}
    for key, op in ops.items():
        mat = rat.zeros(k, k)
        for col, b in enumerate(basis):
            img = _apply(op, b)
            for row, c in enumerate(basis):
                mat[row][col] = inner(c, img) / norms[row]
        gens[key] = mat

    desc = tuple({monos[r]: str(c) for r, c in enumerate(b) if c} for b in basis)
    return RepData(ell, m, k, gens, tuple(norms), desc)


def so_bracket_image(rep: RepData, a: tuple[int, int], b: tuple[int, int]) -> dict[tuple[int, int], int]:
    """Coefficients of [E_a, E_b] in the E_ij basis of so(l)."""
    n = rep.ell
    ea = np.zeros((n, n), dtype=int)
    eb = np.zeros((n, n), dtype=int)
    ea[a[0] - 1, a[1] - 1], ea[a[1] - 1, a[0] - 1] = 1, -1
    eb[b[0] - 1, b[1] - 1], eb[b[1] - 1, b[0] - 1] = 1, -1
    c = ea @ eb - eb @ ea
    return {(i + 1, j + 1): int(c[i, j]) for i in range(n) for j in range(i + 1, n) if c[i, j]}


def homomorphism_defect(rep: RepData) -> list[tuple]:
    """Pairs of generators where ``[mu(a), mu(b)] != mu([a, b])``."""
    bad = []
    keys = sorted(rep.generators)
    for a, b in itertools.combinations(keys, 2):
        ma, mb = rep.generators[a], rep.generators[b]
        lhs = rat.sub(rat.matmul(ma, mb), rat.matmul(mb, ma))
        rhs = rat.zeros(rep.k, rep.k)
        for key, c in so_bracket_image(rep, a, b).items():
            g = rep.generators[key]
            rhs = [[x + c * y for x, y in zip(r1, r2)] for r1, r2 in zip(rhs, g)]
        if not rat.is_zero(rat.sub(lhs, rhs)):
            bad.append((a, b))
    return bad


# -- harmonic-family hypotheses --------------------------------------------


def _transitive_sphere_table(k: int) -> list[tuple[str, int]]:
    """Compact connected groups acting transitively on S^{k-1}, as (name, dim)."""
    rows = [(f"SO({k})", k * (k - 1) // 2)]
    if k % 2 == 0:
        h = k // 2
        rows += [(f"U({h})", h * h), (f"SU({h})", h * h - 1)]
    if k % 4 == 0:
        q = k // 4
        sp = q * (2 * q + 1)
        rows += [(f"Sp({q})", sp), (f"Sp({q})U(1)", sp + 1), (f"Sp({q})Sp(1)", sp + 3)]
    if k == 7:
        rows.append(("G2", 14))
    if k == 8:
        rows.append(("Spin(7)", 21))
    if k == 16:
        rows.append(("Spin(9)", 36))
    return rows


@dataclass(frozen=True)
class ConditionReport:
    cond_a: bool
    fixed_dim: int
    cond_b: bool
    transitive_match: str | None
    cond_c: bool
    sl_multiplicity: int
    cond_d: bool
    n: int
    k: int

    @property
    def all_pass(self) -> bool:
        return self.cond_a and self.cond_b and self.cond_c and self.cond_d

    def failed(self) -> list[str]:
        return [name for name, ok in zip("abcd", (self.cond_a, self.cond_b, self.cond_c, self.cond_d)) if not ok]

    def to_dict(self) -> dict:
        return {
            "a": {"pass": self.cond_a, "fixed_subspace_dim": self.fixed_dim},
            "b": {"pass": self.cond_b, "transitive_match": self.transitive_match},
            "c": {"pass": self.cond_c, "sl_multiplicity_in_S2": self.sl_multiplicity},
            "d": {"pass": self.cond_d, "n": self.n, "k": self.k},
            "all_pass": self.all_pass,
        }


def fixed_subspace_dim(rep: RepData) -> int:
    rows = []
    for (i, j), mat in rep.generators.items():
        if j < rep.ell:
            rows.extend(mat)
    return len(rat.nullspace(rows, rep.k)) if rows else rep.k


def transitive_match(rep: RepData) -> str | None:
    dim = rep.ell * (rep.ell - 1) // 2
    if dim < rep.k - 1:
        return None  # orbits of S^{k-1} have dimension < k - 1
    for name, gdim in _transitive_sphere_table(rep.k):
        if gdim == dim:
            return name
    return None


def _sym2_operator(mat: list[list[Fraction]], pairs: list[tuple[int, int]], index) -> list[list[Fraction]]:
    size = len(pairs)
    out = rat.zeros(size, size)
    k = len(mat)
    for col, (a, b) in enumerate(pairs):
        for c in range(k):
            x = mat[c][a]
            if x:
                out[index[tuple(sorted((c, b)))]][col] += x
            y = mat[c][b]
            if y:
                out[index[tuple(sorted((a, c)))]][col] += y
    return out


def sl_multiplicity_in_sym2(rep: RepData) -> int:
    """dim Hom_{so(l)}(R^l, S^2 mu), computed exactly.

    A copy of the standard representation lies in the eigenspace of the
    Casimir ``sum_{i<j} mu(E_ij)^2`` with eigenvalue ``-(l - 1)``; the
    equivariance system is solved only on that eigenspace.
    """
    k, ell = rep.k, rep.ell
    pairs = [(a, b) for a in range(k) for b in range(a, k)]
    index = {p: i for i, p in enumerate(pairs)}
    size = len(pairs)
    sym = {key: _sym2_operator(mat, pairs, index) for key, mat in rep.generators.items()}

    cas = rat.zeros(size, size)
    for op in sym.values():
        sq = rat.matmul(op, op)
        cas = [[x + y for x, y in zip(r1, r2)] for r1, r2 in zip(cas, sq)]
    for i in range(size):
        cas[i][i] += ell - 1
    eig = rat.nullspace(cas, size)
    if not eig:
        return 0

    # restrict S^2 mu to the eigenspace: op @ B = B @ R
    basis_t = rat.transpose(eig)  # size x r
    r = len(eig)
    restricted = {}
    for key, op in sym.items():
        img = rat.matmul(op, basis_t)
        coords = rat.zeros(r, r)
        for col in range(r):
            sol = _solve_in_span(eig, [img[row][col] for row in range(size)])
            for row in range(r):
                coords[row][col] = sol[row]
        restricted[key] = coords

    # unknown T: r x l, equations R(xi) T - T std(xi) = 0
    nunk = r * ell
    rows = []
    for (i, j), rmat in restricted.items():
        std = rat.zeros(ell, ell)
        std[i - 1][j - 1] = Fraction(1)
        std[j - 1][i - 1] = Fraction(-1)
        for a in range(r):
            for b in range(ell):
                row = [Fraction(0)] * nunk
                for c in range(r):
                    if rmat[a][c]:
                        row[c * ell + b] += rmat[a][c]
                for c in range(ell):
                    if std[c][b]:
                        row[a * ell + c] -= std[c][b]
                rows.append(row)
    return len(rat.nullspace(rows, nunk))


def _solve_in_span(vectors: list[list[Fraction]], v: list[Fraction]) -> list[Fraction]:
    """Coefficients c with sum_i c_i vectors[i] = v (vectors independent)."""
    r = len(vectors)
    aug = [[vectors[i][row] for i in range(r)] + [v[row]] for row in range(len(v))]
    red, pivots = rat.rref(aug)
    if r in pivots:
        raise ArithmeticError("vector not in span")
    sol = [Fraction(0)] * r
    for row, pc in zip(red, pivots):
        sol[pc] = row[r]
    return sol


def check_theorem31_conditions(rep: RepData, n: int) -> ConditionReport:
    if n < 2:
        raise InputError("n must be at least 2")
    fdim = fixed_subspace_dim(rep)
    match = transitive_match(rep)
    mult = sl_multiplicity_in_sym2(rep)
    return ConditionReport(
        cond_a=fdim >= 1,
        fixed_dim=fdim,
        cond_b=match is None,
        transitive_match=match,
        cond_c=mult == 0,
        sl_multiplicity=mult,
        cond_d=n >= rep.k + 2,
        n=n,
        k=rep.k,
    )
