"""Group diagrams H < K-, K+ < G at the Lie algebra level.

Two families are built here:

* the Brieskorn action of SO(2)SO(n) on M_d^{2n-1}, with complement basis
  ``X, Y, E_1..E_{n-2}, F_1..F_{n-2}``;
* the SO(n) family built from a representation ``mu`` of SO(l) on R^k
  (K- = mu(SO(l)) SO(n-k), K+ = mu(SO(l-1)) SO(n-k+1),
  H = mu(SO(l-1)) SO(n-k)).

Component groups (the Z_2 factors, O(n-1)) are recorded as metadata only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping

import numpy as np

from . import _rational as rat
from .errors import ConfigurationError, InputError, UnsupportedError
from .harmonic import ConditionReport, RepData, check_theorem31_conditions
from .liealg import AlgElement, QFormParams, basis_element, bracket, q_inner


@dataclass(frozen=True, eq=False)
class GroupDiagram:
    family: str
    n: int
    params: Mapping[str, int]
    qform: QFormParams
    h_basis: tuple[AlgElement, ...]
    kminus_basis: tuple[AlgElement, ...]
    kplus_basis: tuple[AlgElement, ...]
    complement_basis: tuple[AlgElement, ...]
    block_labels: Mapping[str, tuple[int, ...]]
    codims: tuple[int, int]
    # rational spanning vectors of the complement, Q-orthogonal with the
    # given squared norms; ``None`` entries mean no rational form is known
    complement_exact: tuple[AlgElement | None, ...] = ()
    complement_norms2: tuple[Fraction | None, ...] = ()
    labels: tuple[str, ...] = ()
    metadata: Mapping[str, object] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.complement_basis)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def unit(self, label: str) -> np.ndarray:
        v = np.zeros(self.dim)
        v[self.index(label)] = 1.0
        return v

    def vector(self, **coeffs: float) -> np.ndarray:
        """Coefficient vector from labels, e.g. ``vector(E1=1, F2=1)``."""
        v = np.zeros(self.dim)
        for name, c in coeffs.items():
            v[self.index(name)] += c
        return v

    def coords(self, z: AlgElement) -> np.ndarray:
        """Q-orthogonal projection of a float element onto the complement."""
        z = z.to_float()
        return np.array([q_inner(z, e, self.qform) for e in self.complement_basis])

    def element(self, v) -> AlgElement:
        out = AlgElement.zero(self.n, exact=False)
        for c, e in zip(v, self.complement_basis):
            if c:
                out = out + e.scale(c)
        return out

    @cached_property
    def structure(self) -> "Structure":
        return _structure(self)

    # invariants ---------------------------------------------------------

    def check_invariants(self) -> dict[str, bool]:
        """Evaluate the diagram invariants, exactly where rational data exists."""
        out = {}
        exact = bool(self.complement_exact) and all(e is not None for e in self.complement_exact)
        h = [e for e in self.h_basis]
        hcoords = [e.upper_coords() for e in h]
        km = [e.upper_coords() for e in self.kminus_basis]
        kp = [e.upper_coords() for e in self.kplus_basis]
        if h and h[0].exact:
            out["h_in_kminus"] = all(rat.in_span(km, v) for v in hcoords)
            out["h_in_kplus"] = all(rat.in_span(kp, v) for v in hcoords)
        else:
            out["h_in_kminus"] = _float_in_span(km, hcoords)
            out["h_in_kplus"] = _float_in_span(kp, hcoords)

        if exact:
            comp = self.complement_exact
            ok = True
            for i, a in enumerate(comp):
                for j, b in enumerate(comp):
                    want = self.complement_norms2[i] if i == j else 0
                    ok &= q_inner(a, b, self.qform) == want
            out["complement_orthonormal"] = ok
            out["complement_perp_h"] = all(q_inner(a, b, self.qform) == 0 for a in comp for b in h)
            blocks_ok = True
            for name, idx in self.block_labels.items():
                span = [comp[i].upper_coords() for i in idx]
                for x in h:
                    for i in idx:
                        blocks_ok &= rat.in_span(span, bracket(x, comp[i]).upper_coords())
            out["blocks_invariant"] = blocks_ok
        else:
            comp = self.complement_basis
            gram = np.array([[q_inner(a, b, self.qform) for b in comp] for a in comp])
            out["complement_orthonormal"] = bool(np.allclose(gram, np.eye(len(comp)), atol=1e-12))
            hf = [x.to_float() for x in h]
            out["complement_perp_h"] = all(abs(q_inner(a, b, self.qform)) < 1e-12 for a in comp for b in hf)
            blocks_ok = True
            for name, idx in self.block_labels.items():
                span = [np.array(comp[i].upper_coords(), dtype=float) for i in idx]
                for x in hf:
                    for i in idx:
                        v = np.array(bracket(x, comp[i]).upper_coords(), dtype=float)
                        blocks_ok &= _float_in_span(span, [v])
            out["blocks_invariant"] = blocks_ok
        g_dim = len(self.h_basis) + self.dim
        total = self.n * (self.n - 1) // 2 + (1 if self.family == "brieskorn" else 0)
        out["dimension_count"] = g_dim == total
        return out

    # serialization ------------------------------------------------------

    def to_json(self) -> str:
        def enc(e: AlgElement | None):
            if e is None:
                return None
            fmt = (lambda x: str(Fraction(x))) if e.exact else (lambda x: repr(float(x)))
            return {
                "exact": e.exact,
                "so2": fmt(e.so2_part),
                "matrix": [[fmt(x) for x in row] for row in e.mat_part.tolist()],
            }

        doc = {
            "family": self.family,
            "n": self.n,
            "params": dict(self.params),
            "q_weight_d": self.qform.d,
            "codims": list(self.codims),
            "labels": list(self.labels),
            "block_labels": {k: list(v) for k, v in self.block_labels.items()},
            "h_basis": [enc(e) for e in self.h_basis],
            "kminus_basis": [enc(e) for e in self.kminus_basis],
            "kplus_basis": [enc(e) for e in self.kplus_basis],
            "complement_basis": [enc(e) for e in self.complement_basis],
            "complement_exact": [enc(e) for e in self.complement_exact],
            "complement_norms2": [None if x is None else str(x) for x in self.complement_norms2],
            "metadata": {k: v for k, v in self.metadata.items() if _jsonable(v)},
        }
        return json.dumps(doc, indent=1, sort_keys=True)


def _jsonable(v) -> bool:
    try:
        json.dumps(v)
    except TypeError:
        return False
    return True


def _float_in_span(span, vecs, tol=1e-10) -> bool:
    if not span:
        return all(np.linalg.norm(np.asarray(v, dtype=float)) < tol for v in vecs)
    a = np.array(span, dtype=float).T
    for v in vecs:
        v = np.asarray(v, dtype=float)
        c, *_ = np.linalg.lstsq(a, v, rcond=None)
        if np.linalg.norm(a @ c - v) > tol * max(1.0, np.linalg.norm(v)):
            return False
    return True


def diagram_from_json(text: str) -> GroupDiagram:
    doc = json.loads(text)

    def dec(e):
        if e is None:
            return None
        if e["exact"]:
            return AlgElement.from_matrix([[Fraction(x) for x in r] for r in e["matrix"]], Fraction(e["so2"]))
        return AlgElement.from_matrix([[float(x) for x in r] for r in e["matrix"]], float(e["so2"]), exact=False)

    return GroupDiagram(
        family=doc["family"],
        n=doc["n"],
        params=doc["params"],
        qform=QFormParams(doc["q_weight_d"], doc["n"]),
        h_basis=tuple(dec(e) for e in doc["h_basis"]),
        kminus_basis=tuple(dec(e) for e in doc["kminus_basis"]),
        kplus_basis=tuple(dec(e) for e in doc["kplus_basis"]),
        complement_basis=tuple(dec(e) for e in doc["complement_basis"]),
        block_labels={k: tuple(v) for k, v in doc["block_labels"].items()},
        codims=tuple(doc["codims"]),
        complement_exact=tuple(dec(e) for e in doc["complement_exact"]),
        complement_norms2=tuple(None if x is None else Fraction(x) for x in doc["complement_norms2"]),
        labels=tuple(doc["labels"]),
        metadata=doc["metadata"],
    )


# -- Brieskorn family -------------------------------------------------------


def brieskorn_diagram(n: int, d: int) -> GroupDiagram:
    if n < 4:
        raise UnsupportedError(f"n = {n}: the plane catalog uses E_2 and F_2, which needs n >= 4")
    if d < 1:
        raise InputError(f"d must be positive, got {d}")
    q = QFormParams(d, n)
    one_over_d = Fraction(1, d)
    I = AlgElement.so2(n, one_over_d)
    e12 = basis_element(1, 2, n)
    xhat = I + e12
    yhat = I - e12
    es = [basis_element(1, i + 2, n) for i in range(1, n - 1)]
    fs = [basis_element(2, i + 2, n) for i in range(1, n - 1)]
    h = tuple(basis_element(i, j, n) for i in range(3, n + 1) for j in range(i + 1, n + 1))

    exact = (xhat, yhat, *es, *fs)
    norms2 = (Fraction(2), Fraction(2)) + (Fraction(1),) * (2 * (n - 2))
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    comp = (xhat.to_float().scale(inv_sqrt2), yhat.to_float().scale(inv_sqrt2)) + tuple(
        e.to_float() for e in (*es, *fs)
    )
    m = n - 2
    labels = ("X", "Y") + tuple(f"E{i}" for i in range(1, m + 1)) + tuple(f"F{i}" for i in range(1, m + 1))
    blocks = {
        "p1": (0,),
        "p2": (1,),
        "m1": tuple(range(2, 2 + m)),
        "m2": tuple(range(2 + m, 2 + 2 * m)),
    }
    return GroupDiagram(
        family="brieskorn",
        n=n,
        params={"d": d},
        qform=q,
        h_basis=h,
        kminus_basis=h + (xhat,),
        kplus_basis=h + tuple(fs),
        complement_basis=comp,
        block_labels=blocks,
        codims=(2, n - 1),
        complement_exact=exact,
        complement_norms2=norms2,
        labels=labels,
        metadata={
            "H": "Z2 x SO(n-2)",
            "K-": "SO(2)SO(n-2)",
            "K+": "O(n-1)" if d % 2 else "Z2 x SO(n-1)",
        },
    )


def bi_invariant_diagram(n: int) -> GroupDiagram:
    """SO(n) itself (H trivial) with its E_ij basis; g = Q is bi-invariant."""
    if n < 2:
        raise InputError(f"n must be at least 2, got {n}")
    exact = tuple(basis_element(i, j, n) for i in range(1, n + 1) for j in range(i + 1, n + 1))
    labels = tuple(f"E{i},{j}" for i in range(1, n + 1) for j in range(i + 1, n + 1))
    return GroupDiagram(
        family="group",
        n=n,
        params={},
        qform=QFormParams(1, n),
        h_basis=(),
        kminus_basis=(),
        kplus_basis=(),
        complement_basis=tuple(e.to_float() for e in exact),
        block_labels={"g": tuple(range(len(exact)))},
        codims=(0, 0),
        complement_exact=exact,
        complement_norms2=(Fraction(1),) * len(exact),
        labels=labels,
    )


# -- the SO(n) family from a representation -------------------------------


def _embed(mat: np.ndarray, n: int, offset: int = 0) -> AlgElement:
    full = np.zeros((n, n))
    k = mat.shape[0]
    full[offset : offset + k, offset : offset + k] = mat
    return AlgElement.from_matrix(full, exact=False)


def theorem31_diagram(rep: RepData, n: int, report: ConditionReport | None = None) -> GroupDiagram:
    report = report if report is not None else check_theorem31_conditions(rep, n)
    if not report.all_pass:
        raise ConfigurationError(f"conditions {report.failed()} fail: {report.to_dict()}")
    k, ell = rep.k, rep.ell
    q = QFormParams(1, n)
    imgs = rep.float_images()
    mu_k = tuple(_embed(imgs[(i, j)], n) for i in range(1, ell + 1) for j in range(i + 1, ell + 1))
    mu_h = tuple(_embed(imgs[(i, j)], n) for i in range(1, ell) for j in range(i + 1, ell))
    lower = tuple(basis_element(i, j, n, exact=False) for i in range(k + 1, n + 1) for j in range(i + 1, n + 1))
    lower_plus = tuple(basis_element(i, j, n, exact=False) for i in range(k, n + 1) for j in range(i + 1, n + 1))
    h = mu_h + lower

    # W: E_ij with i <= k < j; exact and Q-orthonormal
    w_exact, w_labels, rows = [], [], {}
    for i in range(1, k + 1):
        for j in range(k + 1, n + 1):
            rows.setdefault(i, []).append(len(w_exact))
            w_exact.append(basis_element(i, j, n))
            w_labels.append(f"W{i},{j}")

    # rest: orthonormal complement of mu(so(l-1)) inside so(k)
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    if mu_h:
        hmat = np.array([[imgs[key][i, j] for (i, j) in pairs] for key in sorted(imgs) if key[1] < ell])
        _, s, vt = np.linalg.svd(hmat)
        r = int((s > 1e-10).sum())
        rest_coords = vt[r:]
    else:
        rest_coords = np.eye(len(pairs))
    rest = []
    for c in rest_coords:
        mat = np.zeros((n, n))
        for val, (i, j) in zip(c, pairs):
            mat[i, j], mat[j, i] = val, -val
        rest.append(AlgElement.from_matrix(mat, exact=False))

    comp = tuple(e.to_float() for e in w_exact) + tuple(rest)
    nw = len(w_exact)
    upper = tuple(idx for i in range(1, k) for idx in rows[i])
    blocks = {"W_upper": upper, "W_last": tuple(rows[k]), "rest": tuple(range(nw, nw + len(rest)))}
    labels = tuple(w_labels) + tuple(f"R{i}" for i in range(len(rest)))
    return GroupDiagram(
        family="theorem31",
        n=n,
        params={"l": ell, "m": rep.m, "k": k},
        qform=q,
        h_basis=h,
        kminus_basis=mu_k + lower,
        kplus_basis=mu_h + lower_plus,
        complement_basis=comp,
        block_labels=blocks,
        codims=(ell, n - k + 1),
        complement_exact=tuple(w_exact) + (None,) * len(rest),
        complement_norms2=(Fraction(1),) * nw + (None,) * len(rest),
        labels=labels,
        metadata={"w_rows": {str(i): list(v) for i, v in rows.items()}, "conditions": report.to_dict()},
    )


def w_row_invariant_under_lower(diagram: GroupDiagram) -> bool:
    """Each row of W is preserved by the so(n-k) factor of h (exact check)."""
    k = diagram.params["k"]
    n = diagram.n
    lower = [basis_element(i, j, n) for i in range(k + 1, n + 1) for j in range(i + 1, n + 1)]
    rows = {int(i): v for i, v in diagram.metadata["w_rows"].items()}
    for i, idx in rows.items():
        span = [diagram.complement_exact[t].upper_coords() for t in idx]
        for x in lower:
            for t in idx:
                if not rat.in_span(span, bracket(x, diagram.complement_exact[t]).upper_coords()):
                    return False
    return True


# -- float structure data consumed by the curvature engine ---------------


@dataclass(frozen=True, eq=False)
class Structure:
    """Structure constants of the complement.

    ``c[i, j, k]`` is the coefficient of e_k in ``[e_i, e_j]_n`` and
    ``adh[i, j]`` is the matrix of ``z -> [[e_i, e_j]_h, z]`` on the
    complement.
    """

    c: np.ndarray
    adh: np.ndarray


def _structure(diagram: GroupDiagram) -> Structure:
    basis = diagram.complement_basis
    dim = len(basis)
    c = np.zeros((dim, dim, dim))
    adh = np.zeros((dim, dim, dim, dim))
    for i in range(dim):
        for j in range(i + 1, dim):
            br = bracket(basis[i], basis[j])
            coords = diagram.coords(br)
            c[i, j], c[j, i] = coords, -coords
            hpart = br - diagram.element(coords)
            if np.abs(hpart.mat_part).max(initial=0.0) < 1e-14 and abs(hpart.so2_part) < 1e-14:
                continue
            mat = np.column_stack([diagram.coords(bracket(hpart, e)) for e in basis])
            adh[i, j], adh[j, i] = mat, -mat
    return Structure(c, adh)
