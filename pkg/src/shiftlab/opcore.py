"""Lazy operator expressions over a fixed coordinate frame, evaluated exactly.

An :class:`OperatorExpr` is an immutable tree of structured variants
(diagonal, weighted shift, subdiagonal unitary, interleave permutation,
sums, products, scalings, adjoints, finite-rank patches).  Matrix entries
are evaluated *exactly*: products contract over the finitely many
intermediate indices allowed by the children's structure, never by
numerical thresholding.  Truncation to a window therefore yields the true
entries of the infinite matrix, flagged exact.

Bilateral expressions are indexed by integer positions on Z; unilateral
ones live on N (indices >= 0).  Expressions are immutable and all
evaluation is pure, so concurrent use needs no coordination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from .seqcore import ScalarSeq, seq_from_json, seq_to_json

__all__ = [
    "WindowError",
    "SupportError",
    "MAX_WINDOW",
    "TruncationWindow",
    "DenseBlock",
    "BilateralArrangement",
    "OperatorExpr",
    "Diagonal",
    "WeightedShift",
    "ShiftDownUnitary",
    "Permutation",
    "Sum",
    "Product",
    "Scaled",
    "Adjoint",
    "FiniteRankPatch",
    "identity",
    "entry",
    "truncate",
    "truncate_rect",
    "apply",
    "norm_upper_bound",
    "expr_to_json",
    "expr_from_json",
]

MAX_WINDOW = 4096  # resource guard for dense blocks


class WindowError(ValueError):
    """Window violates the resource guard or the expression's domain."""


class SupportError(ValueError):
    """A vector's support escapes the window it was promised to stay in."""


# -- windows and blocks ------------------------------------------------------


@dataclass(frozen=True)
class TruncationWindow:
    """Inclusive index range [lo, hi] with a domain tag."""

    lo: int
    hi: int
    domain: str = "bilateral"
    max_size: int = MAX_WINDOW

    def __post_init__(self):
        if self.lo > self.hi:
            raise WindowError(f"window lo {self.lo} > hi {self.hi}")
        if self.size > self.max_size:
            raise WindowError(f"window size {self.size} exceeds guard {self.max_size}")
        if self.domain == "unilateral" and self.lo < 0:
            raise WindowError("unilateral window cannot contain negative indices")

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    def indices(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def expanded(self, pad: int) -> "TruncationWindow":
        lo = self.lo - pad
        if self.domain == "unilateral":
            lo = max(lo, 0)
        return TruncationWindow(lo, self.hi + pad, self.domain, max_size=self.max_size + 2 * pad)


@dataclass
class DenseBlock:
    """Finite labeled matrix cut from an operator expression.

    ``exact`` marks entry regions that equal the infinite matrix exactly;
    producers that approximate (window-tail effects) clear the affected
    region.
    """

    row_labels: np.ndarray
    col_labels: np.ndarray
    data: np.ndarray
    exact: np.ndarray  # bool mask, same shape as data

    def __post_init__(self):
        self.row_labels = np.asarray(self.row_labels, dtype=np.int64)
        self.col_labels = np.asarray(self.col_labels, dtype=np.int64)
        if self.data.shape != (len(self.row_labels), len(self.col_labels)):
            raise ValueError("block shape does not match label counts")
        if self.exact.shape != self.data.shape:
            raise ValueError("exactness mask shape mismatch")

    def norm2(self) -> float:
        """Largest singular value of the block."""
        if self.data.size == 0:
            return 0.0
        a = self.data
        if np.isrealobj(a) or not np.iscomplexobj(a) or np.all(a.imag == 0):
            a = np.real(a)
        return float(np.linalg.svd(a, compute_uv=False)[0])

    def to_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["row", "col", "re", "im"])
            for i, r in enumerate(self.row_labels):
                for j, c in enumerate(self.col_labels):
                    v = complex(self.data[i, j])
                    w.writerow([int(r), int(c), repr(v.real), repr(v.imag)])

    def to_json_dict(self) -> dict:
        return {
            "rows": [int(r) for r in self.row_labels],
            "cols": [int(c) for c in self.col_labels],
            "re": np.real(self.data).tolist(),
            "im": np.imag(self.data).tolist(),
            "exact": self.exact.astype(bool).tolist(),
        }


class BilateralArrangement:
    """Canonical interleave between Z positions and N coordinate indices.

    position 0 -> 0, position p >= 1 -> 2p - 1, position p <= -1 -> -2p.
    The induced column ordering reads (..., e_2, e_0, e_1, e_3, ...).
    """

    @staticmethod
    def to_index(p: int) -> int:
        if p == 0:
            return 0
        return 2 * p - 1 if p > 0 else -2 * p

    @staticmethod
    def to_position(m: int) -> int:
        if m < 0:
            raise ValueError("coordinate indices are nonnegative")
        if m == 0:
            return 0
        return (m + 1) // 2 if m % 2 == 1 else -(m // 2)


# -- expression tree ---------------------------------------------------------


class OperatorExpr:
    """Base class; subclasses implement structure-exact evaluation."""

    domain: str = "bilateral"

    # bandwidth: entries vanish for |i - j| > bandwidth; None = unbounded
    @property
    def bandwidth(self) -> Optional[int]:
        raise NotImplementedError

    def col_support(self, j: int) -> Iterable[int]:
        """Rows that may be nonzero in column j (finite)."""
        raise NotImplementedError

    def apply_sparse(self, vec: Dict[int, complex]) -> Dict[int, complex]:
        """Exact image of a finitely supported vector."""
        raise NotImplementedError

    def adjoint_expr(self) -> "OperatorExpr":
        return Adjoint(self)

    def _check_domain_index(self, n: int) -> None:
        if self.domain == "unilateral" and n < 0:
            raise WindowError(f"index {n} outside unilateral domain")


def _merge(into: Dict[int, complex], i: int, v: complex) -> None:
    if v == 0:
        return
    into[i] = into.get(i, 0.0) + v


@dataclass(frozen=True)
class Diagonal(OperatorExpr):
    seq: ScalarSeq

    @property
    def domain(self) -> str:  # type: ignore[override]
        return self.seq.domain

    @property
    def bandwidth(self) -> Optional[int]:
        return 0

    def col_support(self, j):
        return (j,)

    def apply_sparse(self, vec):
        out: Dict[int, complex] = {}
        for n, v in vec.items():
            self._check_domain_index(n)
            _merge(out, n, self.seq.at(n) * v)
        return out


@dataclass(frozen=True)
class WeightedShift(OperatorExpr):
    """T e_n = w_n e_{n+1}."""

    weights: ScalarSeq

    @property
    def domain(self) -> str:  # type: ignore[override]
        return self.weights.domain

    @property
    def bandwidth(self) -> Optional[int]:
        return 1

    def col_support(self, j):
        return (j + 1,)

    def apply_sparse(self, vec):
        out: Dict[int, complex] = {}
        for n, v in vec.items():
            self._check_domain_index(n)
            _merge(out, n + 1, self.weights.at(n) * v)
        return out


@dataclass(frozen=True)
class ShiftDownUnitary(OperatorExpr):
    """Subdiagonal of ones on the bilateral arrangement: U e_p = e_{p+1}."""

    domain: str = "bilateral"

    @property
    def bandwidth(self) -> Optional[int]:
        return 1

    def col_support(self, j):
        return (j + 1,)

    def apply_sparse(self, vec):
        return {n + 1: v for n, v in vec.items()}


@dataclass(frozen=True)
class Permutation(OperatorExpr):
    """Interleave isometry V e_p = e_{iota(p)} with iota the arrangement map.

    Columns are orthonormal (V*V = I exactly); the range is the nonnegative
    coordinate axis, so VV* is the projection onto it.
    """

    arrangement: str = "interleave"
    domain: str = "bilateral"

    @property
    def bandwidth(self) -> Optional[int]:
        return None  # displacement |iota(p) - p| is unbounded

    def col_support(self, j):
        return (BilateralArrangement.to_index(j),)

    def apply_sparse(self, vec):
        return {BilateralArrangement.to_index(n): v for n, v in vec.items()}


@dataclass(frozen=True)
class Sum(OperatorExpr):
    terms: Tuple[OperatorExpr, ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("empty sum")
        doms = {t.domain for t in self.terms}
        if len(doms) > 1:
            raise ValueError("sum terms must share a domain")

    @property
    def domain(self) -> str:  # type: ignore[override]
        return self.terms[0].domain

    @property
    def bandwidth(self) -> Optional[int]:
        bws = [t.bandwidth for t in self.terms]
        return None if any(b is None for b in bws) else max(bws)

    def col_support(self, j):
        s = set()
        for t in self.terms:
            s.update(t.col_support(j))
        return sorted(s)

    def apply_sparse(self, vec):
        out: Dict[int, complex] = {}
        for t in self.terms:
            for i, v in t.apply_sparse(vec).items():
                _merge(out, i, v)
        return out


@dataclass(frozen=True)
class Product(OperatorExpr):
    """Composition, applied right-to-left: Product((A, B)) x = A (B x)."""

    factors: Tuple[OperatorExpr, ...]

    def __post_init__(self):
        if not self.factors:
            raise ValueError("empty product")
        doms = {t.domain for t in self.factors}
        if len(doms) > 1:
            raise ValueError("product factors must share a domain")

    @property
    def domain(self) -> str:  # type: ignore[override]
        return self.factors[0].domain

    @property
    def bandwidth(self) -> Optional[int]:
        bws = [t.bandwidth for t in self.factors]
        return None if any(b is None for b in bws) else sum(bws)

    def col_support(self, j):
        cur = {j}
        for f in reversed(self.factors):
            nxt = set()
            for m in cur:
                nxt.update(f.col_support(m))
            cur = nxt
        return sorted(cur)

    def apply_sparse(self, vec):
        cur = dict(vec)
        for f in reversed(self.factors):
            cur = f.apply_sparse(cur)
        return cur


@dataclass(frozen=True)
class Scaled(OperatorExpr):
    c: complex
    expr: OperatorExpr

    @property
    def domain(self) -> str:  # type: ignore[override]
        return self.expr.domain

    @property
    def bandwidth(self) -> Optional[int]:
        return self.expr.bandwidth

    def col_support(self, j):
        return self.expr.col_support(j)

    def apply_sparse(self, vec):
        return {i: self.c * v for i, v in self.expr.apply_sparse(vec).items()}


@dataclass(frozen=True)
class Adjoint(OperatorExpr):
    expr: OperatorExpr

    @property
    def domain(self) -> str:  # type: ignore[override]
        return self.expr.domain

    @property
    def bandwidth(self) -> Optional[int]:
        return self.expr.bandwidth

    def col_support(self, j):
        # rows of the adjoint column j = columns of expr whose support hits j
        e = self.expr
        if isinstance(e, Diagonal):
            return (j,)
        if isinstance(e, (WeightedShift, ShiftDownUnitary)):
            if e.domain == "unilateral" and j - 1 < 0:
                return ()
            return (j - 1,)
        if isinstance(e, Permutation):
            # V* e_j = e_{iota^{-1}(j)} for j in the range of iota, else 0
            if j < 0:
                return ()
            return (BilateralArrangement.to_position(j),)
        if isinstance(e, Sum):
            s = set()
            for t in e.terms:
                s.update(Adjoint(t).col_support(j))
            return sorted(s)
        if isinstance(e, Product):
            cur = {j}
            for f in e.factors:
                nxt = set()
                for m in cur:
                    nxt.update(Adjoint(f).col_support(m))
                cur = nxt
            return sorted(cur)
        if isinstance(e, Scaled):
            return Adjoint(e.expr).col_support(j)
        if isinstance(e, Adjoint):
            return e.expr.col_support(j)
        if isinstance(e, FiniteRankPatch):
            s = set(Adjoint(e.base).col_support(j))
            s.update(jj for (ii, jj, _v) in e.entries if ii == j)
            return sorted(s)
        raise NotImplementedError(type(e))

    def apply_sparse(self, vec):
        out: Dict[int, complex] = {}
        for n, v in vec.items():
            for i in self.col_support(n):
                # (T* e_n)[i] = conj(T[n, i]) with T[n, i] from a column probe
                col = self.expr.apply_sparse({i: 1.0})
                tni = col.get(n, 0.0)
                if tni != 0:
                    _merge(out, i, np.conj(tni) * v)
        return out


@dataclass(frozen=True)
class FiniteRankPatch(OperatorExpr):
    """base + finitely many explicit entries (additive sparse patch)."""

    base: OperatorExpr
    entries: Tuple[Tuple[int, int, complex], ...]

    @property
    def domain(self) -> str:  # type: ignore[override]
        return self.base.domain

    @property
    def bandwidth(self) -> Optional[int]:
        bb = self.base.bandwidth
        if bb is None:
            return None
        reach = max((abs(i - j) for i, j, _ in self.entries), default=0)
        return max(bb, reach)

    def col_support(self, j):
        s = set(self.base.col_support(j))
        s.update(i for (i, jj, _v) in self.entries if jj == j)
        return sorted(s)

    def apply_sparse(self, vec):
        out = self.base.apply_sparse(vec)
        for i, j, v in self.entries:
            if j in vec:
                _merge(out, i, v * vec[j])
        return out


def identity(domain: str = "bilateral") -> OperatorExpr:
    from .seqcore import constant

    return Diagonal(constant(1.0, domain))


# -- the three windowed operations -------------------------------------------


def entry(expr: OperatorExpr, i: int, j: int) -> complex:
    """Exact matrix entry T[i, j], via a sparse column probe."""
    expr._check_domain_index(j)
    col = expr.apply_sparse({j: 1.0})
    return col.get(i, 0.0)


def _block(expr: OperatorExpr, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Exact dense entries on a label rectangle (recursive assembly)."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    out = np.zeros((len(rows), len(cols)), dtype=np.complex128)
    if isinstance(expr, Diagonal):
        common, ri, ci = np.intersect1d(rows, cols, return_indices=True)
        if len(common):
            out[ri, ci] = expr.seq.values(common)
        return out
    if isinstance(expr, WeightedShift):
        common, ri, ci = np.intersect1d(rows, cols + 1, return_indices=True)
        if len(common):
            out[ri, ci] = expr.weights.values(common - 1)
        return out
    if isinstance(expr, ShiftDownUnitary):
        common, ri, ci = np.intersect1d(rows, cols + 1, return_indices=True)
        out[ri, ci] = 1.0
        return out
    if isinstance(expr, Permutation):
        imap = np.array([BilateralArrangement.to_index(int(p)) for p in cols])
        common, ri, ci = np.intersect1d(rows, imap, return_indices=True)
        out[ri, ci] = 1.0
        return out
    if isinstance(expr, Sum):
        for t in expr.terms:
            out += _block(t, rows, cols)
        return out
    if isinstance(expr, Product):
        return _product_block(expr.factors, rows, cols)
    if isinstance(expr, Scaled):
        return expr.c * _block(expr.expr, rows, cols)
    if isinstance(expr, Adjoint):
        return np.conj(_block(expr.expr, cols, rows)).T
    if isinstance(expr, FiniteRankPatch):
        out = _block(expr.base, rows, cols)
        rpos = {int(r): k for k, r in enumerate(rows)}
        cpos = {int(c): k for k, c in enumerate(cols)}
        for i, j, v in expr.entries:
            if i in rpos and j in cpos:
                out[rpos[i], cpos[j]] += v
        return out
    raise NotImplementedError(type(expr))


def _product_block(factors, rows, cols) -> np.ndarray:
    if len(factors) == 1:
        return _block(factors[0], rows, cols)
    a, rest = factors[0], factors[1:]
    rest_bw = [f.bandwidth for f in rest]
    a_bw = a.bandwidth
    if a_bw is not None and all(b is not None for b in rest_bw):
        # banded contraction: intermediate labels within structural reach
        pad_lo = min(rows.min() - a_bw, cols.min() - sum(rest_bw))
        pad_hi = max(rows.max() + a_bw, cols.max() + sum(rest_bw))
        if factors[0].domain == "unilateral":
            pad_lo = max(pad_lo, 0)
        inner = np.arange(pad_lo, pad_hi + 1)
    else:
        # support-exact contraction for unbounded-displacement factors
        support = set()
        tail = Product(tuple(rest)) if len(rest) > 1 else rest[0]
        for j in cols:
            support.update(tail.col_support(int(j)))
        inner = np.array(sorted(support), dtype=np.int64)
        if len(inner) == 0:
            return np.zeros((len(rows), len(cols)), dtype=np.complex128)
    left = _block(a, rows, inner)
    right = _product_block(rest, inner, cols)
    return left @ right


def truncate(expr: OperatorExpr, w: TruncationWindow) -> DenseBlock:
    """Exact dense window [lo, hi] x [lo, hi] of the infinite matrix."""
    if expr.domain == "unilateral" and w.lo < 0:
        raise WindowError("unilateral expression cannot be truncated at negative indices")
    idx = w.indices()
    data = _block(expr, idx, idx)
    return DenseBlock(idx, idx.copy(), data, np.ones(data.shape, dtype=bool))


def truncate_rect(expr: OperatorExpr, rows, cols) -> DenseBlock:
    """Exact dense rectangle with independent row/col label arrays."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    if len(rows) > MAX_WINDOW or len(cols) > MAX_WINDOW:
        raise WindowError("rectangle exceeds window guard")
    data = _block(expr, rows, cols)
    return DenseBlock(rows, cols.copy(), data, np.ones(data.shape, dtype=bool))


def apply(expr: OperatorExpr, vec: Dict[int, complex], w: TruncationWindow) -> Dict[int, complex]:
    """Exact image of a finitely supported vector, reported on the window.

    Raises :class:`SupportError` if the exact image has mass outside the
    window (the caller's support promise was violated).
    """
    for n in vec:
        if n < w.lo or n > w.hi:
            raise SupportError(f"input support index {n} outside window")
    img = expr.apply_sparse(vec)
    outside = [i for i, v in img.items() if (i < w.lo or i > w.hi) and v != 0]
    if outside:
        raise SupportError(f"image has support outside window at {sorted(outside)[:4]}")
    return {i: v for i, v in sorted(img.items())}


def norm_upper_bound(expr: OperatorExpr) -> float:
    """Rigorous upper bound for the operator norm from structure.

    Uses the Schur test sqrt(max row l1 * max col l1); for a single
    diagonal/shift this is just the sup of the weight magnitudes.
    """
    if isinstance(expr, Diagonal):
        return max(abs(expr.seq.sup), abs(expr.seq.inf))
    if isinstance(expr, WeightedShift):
        return max(abs(expr.weights.sup), abs(expr.weights.inf))
    if isinstance(expr, (ShiftDownUnitary, Permutation)):
        return 1.0
    if isinstance(expr, Sum):
        return sum(norm_upper_bound(t) for t in expr.terms)
    if isinstance(expr, Product):
        return math.prod(norm_upper_bound(f) for f in expr.factors)
    if isinstance(expr, Scaled):
        return abs(expr.c) * norm_upper_bound(expr.expr)
    if isinstance(expr, Adjoint):
        return norm_upper_bound(expr.expr)
    if isinstance(expr, FiniteRankPatch):
        patch = math.sqrt(sum(abs(v) ** 2 for _, _, v in expr.entries)) if expr.entries else 0.0
        return norm_upper_bound(expr.base) + patch
    raise NotImplementedError(type(expr))


# -- JSON descriptors --------------------------------------------------------


def expr_to_json(expr: OperatorExpr) -> dict:
    if isinstance(expr, Diagonal):
        return {"op": "diagonal", "seq": seq_to_json(expr.seq)}
    if isinstance(expr, WeightedShift):
        return {"op": "weighted_shift", "weights": seq_to_json(expr.weights)}
    if isinstance(expr, ShiftDownUnitary):
        return {"op": "shift_down"}
    if isinstance(expr, Permutation):
        return {"op": "permutation", "arrangement": expr.arrangement}
    if isinstance(expr, Sum):
        return {"op": "sum", "terms": [expr_to_json(t) for t in expr.terms]}
    if isinstance(expr, Product):
        return {"op": "product", "factors": [expr_to_json(f) for f in expr.factors]}
    if isinstance(expr, Scaled):
        c = complex(expr.c)
        return {"op": "scaled", "re": c.real, "im": c.imag, "expr": expr_to_json(expr.expr)}
    if isinstance(expr, Adjoint):
        return {"op": "adjoint", "expr": expr_to_json(expr.expr)}
    if isinstance(expr, FiniteRankPatch):
        ents = [[int(i), int(j), complex(v).real, complex(v).imag] for i, j, v in expr.entries]
        return {"op": "patch", "base": expr_to_json(expr.base), "entries": ents}
    raise NotImplementedError(type(expr))


def expr_from_json(desc: dict) -> OperatorExpr:
    op = desc.get("op")
    if op == "diagonal":
        return Diagonal(seq_from_json(desc["seq"]))
    if op == "weighted_shift":
        return WeightedShift(seq_from_json(desc["weights"]))
    if op == "shift_down":
        return ShiftDownUnitary()
    if op == "permutation":
        return Permutation(desc.get("arrangement", "interleave"))
    if op == "sum":
        return Sum(tuple(expr_from_json(t) for t in desc["terms"]))
    if op == "product":
        return Product(tuple(expr_from_json(f) for f in desc["factors"]))
    if op == "scaled":
        return Scaled(complex(desc["re"], desc.get("im", 0.0)), expr_from_json(desc["expr"]))
    if op == "adjoint":
        return Adjoint(expr_from_json(desc["expr"]))
    if op == "patch":
        ents = tuple((int(i), int(j), complex(re, im)) for i, j, re, im in desc["entries"])
        return FiniteRankPatch(expr_from_json(desc["base"]), ents)
    if op == "identity":
        return identity(desc.get("domain", "bilateral"))
    raise ValueError(f"unknown expression op {op!r}")
