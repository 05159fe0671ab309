"""Exact scalar sequences with analytic metadata.

Every sequence is built from a closed-form kind, so limits, sup/inf and
monotonicity are known at construction time instead of being sampled.
Weight and eigenvalue sequences for all shift models live here.

Supported kinds (JSON descriptors documented in ``schemas/sequence.schema.json``):

- ``constant(c)``                   : c
- ``geometric(c, r)``               : c * r**n              (r > 0)
- ``harmonic_shift(c, a)``          : c / (n + a)           (a >= 0)
- ``affine_limit(L, c, p)``         : L + c * n**(-p)       (n >= 1, p > 0)
- ``loglog(c)``                     : c / (n * log(n + 1))  (n >= 1)
- ``explicit_with_tail(values, tail, first_index)``
- ``two_sided(neg, nonneg)``        : bilateral splice, see below
- ``cyclic(values)``                : values[n mod len]
- ``shifted(base, offset)``         : base(n + offset)

Two-sided convention: ``eval(n) = nonneg(n)`` for n >= 0 and
``eval(n) = neg(-n)`` for n < 0, so the negative branch is consumed at
indices 1, 2, 3, ... moving left.  This matches weight displays of the
form (..., b_2, b_1, a_0, a_1, ...).

All values are immutable after construction and every operation is pure,
so sequences are safe to share across threads or processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "ScalarSeq",
    "DomainError",
    "constant",
    "geometric",
    "harmonic_shift",
    "affine_limit",
    "loglog",
    "explicit_with_tail",
    "two_sided",
    "cyclic",
    "shifted",
    "ProductResult",
    "SumResult",
    "partial_product",
    "partial_sum",
    "tail_sq_bound",
    "seq_to_json",
    "seq_from_json",
]

# Magnitude range outside of which running products switch to log-space
# bookkeeping (ratio certificates are expected to diverge on purpose).
_LOG_SPACE_LO = 1e-300
_LOG_SPACE_HI = 1e300


class DomainError(ValueError):
    """An index outside the valid domain of a sequence was requested."""


@dataclass(frozen=True)
class ScalarSeq:
    """A lazily evaluated scalar sequence over Z or N with exact metadata.

    ``limit_pos``/``limit_neg`` are the limits at +inf / -inf (``None`` when
    unknown or undefined, ``math.inf`` allowed).  ``sup``/``inf`` bound every
    value on the valid domain.  ``min_index`` is the first valid index of a
    unilateral sequence (bilateral sequences accept every integer).
    """

    kind: str
    domain: str  # "unilateral" | "bilateral"
    params: tuple
    limit_pos: Optional[float] = None
    limit_neg: Optional[float] = None
    sup: float = math.inf
    inf: float = -math.inf
    nondecreasing: Optional[bool] = None
    nonincreasing: Optional[bool] = None
    min_index: int = 0

    # -- evaluation -------------------------------------------------------

    def _check_index(self, n: int) -> None:
        if self.domain == "unilateral" and n < self.min_index:
            raise DomainError(
                f"index {n} below first valid index {self.min_index} "
                f"of unilateral {self.kind} sequence"
            )

    def at(self, n: int) -> float:
        """Exact value of the closed form at index ``n``."""
        self._check_index(int(n))
        n = int(n)
        k = self.kind
        p = self.params
        if k == "constant":
            return p[0]
        if k == "geometric":
            c, r = p
            return c * r**n
        if k == "harmonic_shift":
            c, a = p
            return c / (n + a)
        if k == "affine_limit":
            big, c, pw = p
            return big + c * float(n) ** (-pw)
        if k == "loglog":
            return p[0] / (n * math.log(n + 1))
        if k == "explicit_with_tail":
            values, tail, first = p
            if n < first + len(values):
                return values[n - first]
            return tail.at(n)
        if k == "two_sided":
            neg, nonneg = p
            return nonneg.at(n) if n >= 0 else neg.at(-n)
        if k == "cyclic":
            values = p[0]
            return values[n % len(values)]
        if k == "shifted":
            base, off = p
            return base.at(n + off)
        raise ValueError(f"unknown kind {k!r}")

    def values(self, ns: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`at` for an integer array of indices."""
        ns = np.asarray(ns, dtype=np.int64)
        if self.domain == "unilateral" and ns.size and ns.min() < self.min_index:
            raise DomainError(
                f"index {int(ns.min())} below first valid index {self.min_index}"
            )
        k = self.kind
        p = self.params
        if k == "constant":
            return np.full(ns.shape, float(p[0]))
        if k == "geometric":
            c, r = p
            return c * np.power(float(r), ns.astype(np.float64))
        if k == "harmonic_shift":
            c, a = p
            return c / (ns + a)
        if k == "affine_limit":
            big, c, pw = p
            return big + c * np.power(ns.astype(np.float64), -pw)
        if k == "loglog":
            nf = ns.astype(np.float64)
            return p[0] / (nf * np.log(nf + 1.0))
        if k == "cyclic":
            values = np.asarray(p[0], dtype=np.float64)
            return values[np.mod(ns, len(values))]
        if k == "shifted":
            base, off = p
            return base.values(ns + off)
        if k == "explicit_with_tail":
            values, tail, first = p
            out = np.empty(ns.shape, dtype=np.float64)
            head = ns < first + len(values)
            if head.any():
                arr = np.asarray(values, dtype=np.float64)
                out[head] = arr[ns[head] - first]
            if (~head).any():
                out[~head] = tail.values(ns[~head])
            return out
        if k == "two_sided":
            neg, nonneg = p
            out = np.empty(ns.shape, dtype=np.float64)
            pos = ns >= 0
            if pos.any():
                out[pos] = nonneg.values(ns[pos])
            if (~pos).any():
                out[~pos] = neg.values(-ns[~pos])
            return out
        raise ValueError(f"unknown kind {k!r}")

    # -- range metadata ---------------------------------------------------

    def range_sup(self, from_index: int) -> float:
        """Exact sup of ``{eval(n) : n >= from_index}`` for unilateral kinds.

        Falls back to the global sup when the kind has no usable monotone
        structure (still a valid upper bound).
        """
        from_index = max(from_index, self.min_index)
        if self.kind == "cyclic":
            return max(self.params[0])
        if self.kind == "constant":
            return self.params[0]
        if self.kind == "explicit_with_tail":
            values, tail, first = self.params
            lo = max(from_index, first)
            head = [values[n - first] for n in range(lo, first + len(values))]
            t = tail.range_sup(max(from_index, first + len(values)))
            return max(head + [t]) if head else t
        if self.kind == "shifted":
            base, off = self.params
            return base.range_sup(from_index + off)
        if self.nonincreasing:
            return self.at(from_index)
        if self.nondecreasing and self.limit_pos is not None:
            return self.limit_pos
        return self.sup

    def range_inf(self, from_index: int) -> float:
        """Exact inf of the values at indices >= ``from_index`` (see range_sup)."""
        from_index = max(from_index, self.min_index)
        if self.kind == "cyclic":
            return min(self.params[0])
        if self.kind == "constant":
            return self.params[0]
        if self.kind == "explicit_with_tail":
            values, tail, first = self.params
            lo = max(from_index, first)
            head = [values[n - first] for n in range(lo, first + len(values))]
            t = tail.range_inf(max(from_index, first + len(values)))
            return min(head + [t]) if head else t
        if self.kind == "shifted":
            base, off = self.params
            return base.range_inf(from_index + off)
        if self.nondecreasing:
            return self.at(from_index)
        if self.nonincreasing and self.limit_pos is not None:
            return self.limit_pos
        return self.inf


# -- factories -------------------------------------------------------------


def constant(c: float, domain: str = "unilateral") -> ScalarSeq:
    c = float(c)
    return ScalarSeq(
        kind="constant",
        domain=domain,
        params=(c,),
        limit_pos=c,
        limit_neg=c if domain == "bilateral" else None,
        sup=c,
        inf=c,
        nondecreasing=True,
        nonincreasing=True,
    )


def geometric(c: float, r: float, domain: str = "unilateral") -> ScalarSeq:
    """c * r**n.  Requires r > 0; metadata is exact for c != 0."""
    c, r = float(c), float(r)
    if r <= 0:
        raise ValueError("geometric ratio must be positive")
    if c == 0.0 or r == 1.0:
        return ScalarSeq(
            "geometric", domain, (c, r),
            limit_pos=c, limit_neg=c if domain == "bilateral" else None,
            sup=c, inf=c, nondecreasing=True, nonincreasing=True,
        )
    if domain == "bilateral":
        # |values| sweep (0, inf) in one direction since r != 1
        grows_left = r < 1.0
        lim_pos = 0.0 if r < 1.0 else math.copysign(math.inf, c)
        lim_neg = math.copysign(math.inf, c) if grows_left else 0.0
        sup = math.inf if c > 0 else 0.0
        inf = 0.0 if c > 0 else -math.inf
        return ScalarSeq(
            "geometric", domain, (c, r),
            limit_pos=lim_pos, limit_neg=lim_neg, sup=sup, inf=inf,
            nondecreasing=(c > 0) == (r > 1.0),
            nonincreasing=(c > 0) == (r < 1.0),
        )
    if r < 1.0:
        lim = 0.0
        sup, inf = (c, 0.0) if c > 0 else (0.0, c)
    else:
        lim = math.copysign(math.inf, c)
        sup, inf = (math.inf, c) if c > 0 else (c, -math.inf)
    return ScalarSeq(
        "geometric", domain, (c, r),
        limit_pos=lim, sup=sup, inf=inf,
        nondecreasing=(r >= 1.0) if c > 0 else (r <= 1.0),
        nonincreasing=(r <= 1.0) if c > 0 else (r >= 1.0),
    )


def harmonic_shift(c: float, a: float) -> ScalarSeq:
    """c / (n + a) on the unilateral domain (first index 0, or 1 when a == 0)."""
    c, a = float(c), float(a)
    if a < 0:
        raise ValueError("harmonic_shift offset must be >= 0")
    first = 0 if a > 0 else 1
    top = c / (first + a)
    if c > 0:
        sup, inf = top, 0.0
    elif c < 0:
        sup, inf = 0.0, top
    else:
        sup = inf = 0.0
    return ScalarSeq(
        "harmonic_shift", "unilateral", (c, a),
        limit_pos=0.0, sup=sup, inf=inf,
        nondecreasing=c <= 0, nonincreasing=c >= 0,
        min_index=first,
    )


def affine_limit(limit: float, c: float, p: float) -> ScalarSeq:
    """limit + c * n**(-p) for n >= 1; monotone approach to ``limit``."""
    limit, c, p = float(limit), float(c), float(p)
    if p <= 0:
        raise ValueError("affine_limit requires p > 0")
    first_val = limit + c
    if c > 0:
        sup, inf = first_val, limit
    elif c < 0:
        sup, inf = limit, first_val
    else:
        sup = inf = limit
    return ScalarSeq(
        "affine_limit", "unilateral", (limit, c, p),
        limit_pos=limit, sup=sup, inf=inf,
        nondecreasing=c <= 0, nonincreasing=c >= 0,
        min_index=1,
    )


def loglog(c: float) -> ScalarSeq:
    """c / (n * log(n + 1)) for n >= 1.

    For c > 0 this has sum(a_n) divergent while sum(n * a_n**2) converges,
    which is exactly the regime the conditional-basis construction needs.
    """
    c = float(c)
    top = c / math.log(2.0)
    if c > 0:
        sup, inf = top, 0.0
    elif c < 0:
        sup, inf = 0.0, top
    else:
        sup = inf = 0.0
    return ScalarSeq(
        "loglog", "unilateral", (c,),
        limit_pos=0.0, sup=sup, inf=inf,
        nondecreasing=c <= 0, nonincreasing=c >= 0,
        min_index=1,
    )


def explicit_with_tail(values, tail: ScalarSeq, first_index: int = 0) -> ScalarSeq:
    """Explicit prefix ``values`` at indices first_index.., then ``tail``.

    The tail is evaluated at the global index, so it must be valid from
    ``first_index + len(values)`` on.
    """
    values = tuple(float(v) for v in values)
    if not values:
        raise ValueError("explicit prefix must be nonempty")
    if tail.domain != "unilateral":
        raise ValueError("tail must be unilateral")
    splice = first_index + len(values)
    if tail.min_index > splice:
        raise ValueError("tail is not valid at the splice index")
    tail_sup = tail.range_sup(splice)
    tail_inf = tail.range_inf(splice)
    sup = max(max(values), tail_sup)
    inf = min(min(values), tail_inf)
    nondec = all(a <= b for a, b in zip(values, values[1:]))
    noninc = all(a >= b for a, b in zip(values, values[1:]))
    # Monotonicity across the splice can only be confirmed, never assumed.
    nondec = nondec and bool(tail.nondecreasing) and values[-1] <= tail.at(splice)
    noninc = noninc and bool(tail.nonincreasing) and values[-1] >= tail.at(splice)
    return ScalarSeq(
        "explicit_with_tail", "unilateral", (values, tail, int(first_index)),
        limit_pos=tail.limit_pos, sup=sup, inf=inf,
        nondecreasing=nondec, nonincreasing=noninc,
        min_index=int(first_index),
    )


def two_sided(neg: ScalarSeq, nonneg: ScalarSeq) -> ScalarSeq:
    """Bilateral splice: ``neg`` consumed at -n for n < 0, ``nonneg`` at n >= 0."""
    if neg.domain != "unilateral" or nonneg.domain != "unilateral":
        raise ValueError("two_sided branches must be unilateral")
    if nonneg.min_index > 0:
        raise ValueError("nonneg branch must be valid from index 0")
    if neg.min_index > 1:
        raise ValueError("neg branch must be valid from index 1")
    neg_sup, neg_inf = neg.range_sup(1), neg.range_inf(1)
    pos_sup, pos_inf = nonneg.range_sup(0), nonneg.range_inf(0)
    # Nonincreasing in n means the neg branch grows with its own index.
    noninc = (
        bool(neg.nondecreasing)
        and bool(nonneg.nonincreasing)
        and neg.at(1) >= nonneg.at(0)
    )
    nondec = (
        bool(neg.nonincreasing)
        and bool(nonneg.nondecreasing)
        and neg.at(1) <= nonneg.at(0)
    )
    return ScalarSeq(
        "two_sided", "bilateral", (neg, nonneg),
        limit_pos=nonneg.limit_pos, limit_neg=neg.limit_pos,
        sup=max(neg_sup, pos_sup), inf=min(neg_inf, pos_inf),
        nondecreasing=nondec, nonincreasing=noninc,
    )


def cyclic(values, domain: str = "unilateral") -> ScalarSeq:
    """Periodic repetition of a finite list (well-defined on Z)."""
    values = tuple(float(v) for v in values)
    if not values:
        raise ValueError("cyclic needs at least one value")
    const = len(set(values)) == 1
    lim = values[0] if const else None
    return ScalarSeq(
        "cyclic", domain, (values,),
        limit_pos=lim,
        limit_neg=lim if domain == "bilateral" else None,
        sup=max(values), inf=min(values),
        nondecreasing=const, nonincreasing=const,
    )


def shifted(base: ScalarSeq, offset: int) -> ScalarSeq:
    """Reindexed view ``n -> base(n + offset)``; metadata carries over."""
    offset = int(offset)
    if base.domain != "unilateral":
        raise ValueError("shifted is only defined for unilateral bases")
    new_min = base.min_index - offset
    return ScalarSeq(
        "shifted", "unilateral", (base, offset),
        limit_pos=base.limit_pos,
        sup=base.range_sup(base.min_index),
        inf=base.range_inf(base.min_index),
        nondecreasing=base.nondecreasing, nonincreasing=base.nonincreasing,
        min_index=new_min,
    )


# -- products and sums -------------------------------------------------------


@dataclass(frozen=True)
class ProductResult:
    """Product over an index range with log-space bookkeeping.

    ``value`` is the direct float product (may be 0.0 or inf after under/
    overflow); ``log_abs`` and ``sign`` are always meaningful and exact up
    to float additions, so diverging ratio certificates can keep going.
    """

    value: float
    log_abs: float
    sign: float
    used_log_space: bool


@dataclass(frozen=True)
class SumResult:
    value: float
    tail_bound: Optional[float]  # rigorous upper bound for the sum beyond j


def partial_product(seq: ScalarSeq, i: int, j: int) -> ProductResult:
    """prod_{n=i}^{j} seq(n), switching to log-space accounting on overflow."""
    if i > j:
        raise ValueError(f"empty product range [{i}, {j}]")
    seq._check_index(i)
    vals = seq.values(np.arange(i, j + 1))
    sign = 1.0
    if (vals == 0).any():
        return ProductResult(0.0, -math.inf, 0.0, False)
    sign = float(np.prod(np.sign(vals)))
    log_abs = float(np.sum(np.log(np.abs(vals))))
    with np.errstate(over="ignore", under="ignore"):
        value = sign * float(np.prod(np.abs(vals)))
    used_log = not (abs(value) >= _LOG_SPACE_LO and abs(value) <= _LOG_SPACE_HI)
    if used_log:
        value = sign * (0.0 if log_abs < 0 else math.inf)
    return ProductResult(value, log_abs, sign, used_log)


def _tail_sum_bound(seq: ScalarSeq, j: int) -> Optional[float]:
    """Rigorous upper bound for sum_{n > j} seq(n), when the kind admits one.

    Only nonnegative decreasing shapes get bounds; ``None`` means no bound
    is available (and +inf means a provably divergent tail).
    """
    k, p = seq.kind, seq.params
    if k == "constant":
        c = p[0]
        return 0.0 if c == 0 else (math.inf if c > 0 else None)
    if k == "geometric":
        c, r = p
        if c < 0:
            return None
        if r < 1.0:
            return c * r ** (j + 1) / (1.0 - r)  # exact geometric tail
        return math.inf if c > 0 else 0.0
    if k == "harmonic_shift":
        c, _ = p
        if c < 0:
            return None
        return math.inf if c > 0 else 0.0
    if k == "affine_limit":
        big, c, pw = p
        if big > 0 or (big == 0 and c > 0 and pw <= 1.0):
            return math.inf
        if big == 0 and c >= 0 and pw > 1.0:
            # integral bound: sum_{n>j} c n^-p <= c * j^(1-p) / (p-1)
            jj = max(j, 1)
            return c * jj ** (1.0 - pw) / (pw - 1.0)
        return None
    if k == "loglog":
        c = p[0]
        if c > 0:
            return math.inf  # Bertrand series with exponent 1 diverges
        return 0.0 if c == 0 else None
    if k == "explicit_with_tail":
        values, tail, first = p
        splice = first + len(values)
        if j >= splice - 1:
            return _tail_sum_bound(tail, j)
        head = sum(values[n - first] for n in range(j + 1, splice))
        t = _tail_sum_bound(tail, splice - 1)
        return None if t is None else head + t
    if k == "shifted":
        base, off = p
        return _tail_sum_bound(base, j + off)
    if k == "cyclic":
        values = p[0]
        s = sum(values)
        if s > 0:
            return math.inf
        if all(v == 0 for v in values):
            return 0.0
        return None
    return None


def partial_sum(seq: ScalarSeq, i: int, j: int) -> SumResult:
    """sum_{n=i}^{j} seq(n), plus a rigorous infinite-tail bound beyond j."""
    if i > j:
        raise ValueError(f"empty sum range [{i}, {j}]")
    seq._check_index(i)
    total = 0.0
    # chunked so multi-million-term ranges stay memory-friendly
    chunk = 1 << 20
    n = i
    while n <= j:
        hi = min(j, n + chunk - 1)
        total += float(np.sum(seq.values(np.arange(n, hi + 1))))
        n = hi + 1
    return SumResult(total, _tail_sum_bound(seq, j))


def tail_sq_bound(seq: ScalarSeq, from_index: int) -> float:
    """Rigorous upper bound for sum_{n >= from_index} seq(n)**2.

    Needed for l2 tails of structured basis columns.  Raises ValueError for
    kinds without a certified bound.
    """
    k, p = seq.kind, seq.params
    i = max(from_index, seq.min_index)
    if k == "constant":
        if p[0] == 0:
            return 0.0
        raise ValueError("constant sequence has no square-summable tail")
    if k == "geometric":
        c, r = p
        if r >= 1.0 and c != 0:
            raise ValueError("geometric tail with r >= 1 is not square-summable")
        return (c * c) * r ** (2 * i) / (1.0 - r * r)
    if k == "harmonic_shift":
        c, a = p
        # decreasing: a_i^2 + integral_{i}^{inf} c^2/(x+a)^2 dx
        return (c / (i + a)) ** 2 + c * c / (i + a)
    if k == "loglog":
        c = p[0]
        # a_n = c/(n log(n+1)) decreasing; integral bound with log frozen at i
        ln = math.log(i + 1)
        return (c / (i * ln)) ** 2 + (c * c) / (i * ln * ln)
    if k == "affine_limit":
        big, c, pw = p
        if big != 0:
            raise ValueError("affine_limit with nonzero limit is not square-summable")
        if 2 * pw <= 1:
            raise ValueError("tail not square-summable")
        v = abs(c) * float(i) ** (-pw)
        return v * v + c * c * float(i) ** (1 - 2 * pw) / (2 * pw - 1)
    if k == "explicit_with_tail":
        values, tail, first = p
        splice = first + len(values)
        head = sum(
            values[n - first] ** 2 for n in range(max(i, first), splice) if n >= i
        )
        return head + tail_sq_bound(tail, max(i, splice))
    if k == "shifted":
        base, off = p
        return tail_sq_bound(base, i + off)
    raise ValueError(f"no certified square tail bound for kind {k!r}")


# -- JSON descriptors --------------------------------------------------------


def seq_to_json(seq: ScalarSeq) -> dict:
    """Descriptor round-trippable through :func:`seq_from_json`."""
    k, p = seq.kind, seq.params
    if k == "constant":
        return {"kind": k, "c": p[0], "domain": seq.domain}
    if k == "geometric":
        return {"kind": k, "c": p[0], "r": p[1], "domain": seq.domain}
    if k == "harmonic_shift":
        return {"kind": k, "c": p[0], "a": p[1]}
    if k == "affine_limit":
        return {"kind": k, "limit": p[0], "c": p[1], "p": p[2]}
    if k == "loglog":
        return {"kind": k, "c": p[0]}
    if k == "explicit_with_tail":
        return {
            "kind": k,
            "values": list(p[0]),
            "tail": seq_to_json(p[1]),
            "first_index": p[2],
        }
    if k == "two_sided":
        return {"kind": k, "neg": seq_to_json(p[0]), "nonneg": seq_to_json(p[1])}
    if k == "cyclic":
        return {"kind": k, "values": list(p[0]), "domain": seq.domain}
    if k == "shifted":
        return {"kind": k, "base": seq_to_json(p[0]), "offset": p[1]}
    raise ValueError(f"unknown kind {k!r}")


def seq_from_json(desc: dict) -> ScalarSeq:
    kind = desc.get("kind")
    if kind == "constant":
        return constant(desc["c"], desc.get("domain", "unilateral"))
    if kind == "geometric":
        return geometric(desc["c"], desc["r"], desc.get("domain", "unilateral"))
    if kind == "harmonic_shift":
        return harmonic_shift(desc["c"], desc["a"])
    if kind == "affine_limit":
        return affine_limit(desc["limit"], desc["c"], desc["p"])
    if kind == "loglog":
        return loglog(desc["c"])
    if kind == "explicit_with_tail":
        return explicit_with_tail(
            desc["values"], seq_from_json(desc["tail"]), desc.get("first_index", 0)
        )
    if kind == "two_sided":
        return two_sided(seq_from_json(desc["neg"]), seq_from_json(desc["nonneg"]))
    if kind == "cyclic":
        return cyclic(desc["values"], desc.get("domain", "unilateral"))
    if kind == "shifted":
        return shifted(seq_from_json(desc["base"]), desc["offset"])
    raise ValueError(f"unknown sequence kind {kind!r}")
