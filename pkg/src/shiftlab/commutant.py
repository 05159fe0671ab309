"""Obstruction certificates for commutants and intertwiners of shift models.

A bounded operator commuting with a bilateral weighted shift (weights
lam_n) has entries a_{i,j} tied together by lam_i a_{i,j} = lam_j a_{i+1,j+1}.
Chaining the relation links every off-diagonal entry a_{i,i+k} to a_{0,k}
through an explicit weight-ratio product; when those ratios diverge, the
boundedness of the entries forces a_{0,k} = 0.  The certificates here
compute the ratios on a finite index range and pass when the divergence
crosses an explicit threshold.  The same mechanism, run between two
different diagonal models, certifies that intertwiners vanish
(trivial-kernel evidence for the map X -> AX - XB between the blocks).

The infinite statement "the commutant is trivial" is *not* claimed: a
finite truncation of a shift provably has extra commutant (a Jordan block
commutes with its powers), which :func:`truncated_commutant_dim` makes
visible as a diagnostic.
"""

from __future__ import annotations

import math

import numpy as np

from .certs import Certificate
from .opcore import DenseBlock
from .seqcore import ScalarSeq, seq_to_json

__all__ = [
    "DEFAULT_BOUND",
    "commutant_obstruction",
    "diagonal_identity_certificate",
    "rosenblum_obstruction",
    "truncated_commutant_dim",
]

DEFAULT_BOUND = 1e9  # "diverges" needs an operational threshold


def _require_positive(seq: ScalarSeq, lo: int, hi: int) -> np.ndarray:
    vals = seq.values(np.arange(lo, hi + 1))
    if np.any(vals <= 0):
        bad = int(np.arange(lo, hi + 1)[vals <= 0][0])
        raise ValueError(f"weights must be strictly positive (index {bad})")
    return vals


def commutant_obstruction(lam: ScalarSeq, k: int, n_max: int, bound: float = DEFAULT_BOUND) -> Certificate:
    """Ratio certificate forcing the k-th off-diagonal of a commutant to vanish.

    Computes the coefficients r_i with a_{i,i+k} = r_i * a_{0,k} for
    |i| <= n_max (log-space products, so intentional divergence is fine)
    and passes when max |r_i| >= bound.
    """
    if k == 0:
        raise ValueError(
            "k = 0 is not an obstruction: the recurrence only forces equal "
            "diagonal entries; see diagonal_identity_certificate"
        )
    if lam.domain != "bilateral":
        raise ValueError("commutant obstruction needs bilateral weights")
    if n_max < abs(k) + 1:
        raise ValueError("n_max must be at least |k| + 1")
    _require_positive(lam, -n_max - abs(k) - 1, n_max + abs(k) + 1)

    logs = {}
    span = n_max + abs(k) + 1
    idx = np.arange(-span, span + 1)
    lv = np.log(lam.values(idx))
    pos = {int(n): float(v) for n, v in zip(idx, lv)}

    log_ratios = {0: 0.0}
    acc = 0.0
    for i in range(1, n_max + 1):  # forward chain: a_{i,i+k} from a_{0,k}
        acc += pos[i - 1] - pos[i - 1 + k]
        log_ratios[i] = acc
    acc = 0.0
    for i in range(-1, -n_max - 1, -1):  # backward chain
        acc += pos[i + k] - pos[i]
        log_ratios[i] = acc

    items = sorted(log_ratios.items())
    best_i, best_log = max(items, key=lambda kv: kv[1])
    ratios = [math.exp(v) if v < 700 else math.inf for _, v in items]
    passed = best_log >= math.log(bound)
    logs = {
        "indices": [i for i, _ in items],
        "ratios": ratios,
        "log_ratios": [v for _, v in items],
        "max_ratio": math.exp(best_log) if best_log < 700 else math.inf,
        "max_log_ratio": best_log,
        "index_attained": best_i,
        "threshold": bound,
    }
    return Certificate(
        claim="commutant-offdiagonal-vanishing",
        passed=bool(passed),
        evidence=logs,
        params={"k": k, "n_max": n_max, "bound": bound, "weights": seq_to_json(lam)},
    )


def diagonal_identity_certificate(lam: ScalarSeq, n_max: int) -> Certificate:
    """The i = j recurrence ties consecutive diagonal entries with coefficient
    lam_i / lam_i = 1 exactly; diagonal entries of a commutant are all equal."""
    vals = _require_positive(lam, -n_max, n_max)
    coeffs = vals / vals
    ok = bool(np.all(coeffs == 1.0))
    return Certificate(
        claim="commutant-diagonal-constant",
        passed=ok,
        evidence={"coefficients_all_one": ok, "n_checked": int(2 * n_max + 1)},
        params={"n_max": n_max, "weights": seq_to_json(lam)},
    )


def rosenblum_obstruction(
    gamma_hi: ScalarSeq,
    gamma_lo: ScalarSeq,
    gap_ratio: float,
    n_max: int,
    bound: float = DEFAULT_BOUND,
    k_range: tuple = (0, 4),
) -> Certificate:
    """Intertwiner-vanishing evidence between two diagonal shift blocks.

    ``gamma_hi`` drives the upper block, ``gamma_lo`` the lower one; the
    hypothesis gamma_hi(n)/gamma_lo(m) >= gap_ratio > 1 for n, m >= 1 is
    verified on the sampled range first.  Then the chain products
    R(m, k) = prod_{i=0..m} gamma_hi(i) / prod_{i=k..m+k} gamma_lo(i)
    are computed for m <= n_max and each k in k_range; the certificate
    passes when min_k max_m R(m, k) >= bound.
    """
    if gap_ratio <= 1.0:
        raise ValueError("gap_ratio must exceed 1")
    k_lo, k_hi = int(k_range[0]), int(k_range[1])
    if k_lo > k_hi:
        raise ValueError("empty k range")
    for s, name in ((gamma_hi, "gamma_hi"), (gamma_lo, "gamma_lo")):
        if s.domain != "bilateral" and (k_lo < 0 or s.min_index > 0):
            raise ValueError(f"{name} must be bilateral (or valid from 0 with k >= 0)")

    m_hi = n_max
    hi_vals = _require_positive(gamma_hi, 1, m_hi)
    lo_vals = _require_positive(gamma_lo, 1, m_hi + max(abs(k_lo), abs(k_hi)))
    worst = float(hi_vals.min() / lo_vals.max())
    if worst < gap_ratio:
        raise ValueError(
            f"gap hypothesis fails on sample: min/max ratio {worst} < {gap_ratio}"
        )

    span_lo = min(0, k_lo)
    span_hi = m_hi + max(0, k_hi) + 1
    idx_hi = np.arange(0, m_hi + 1)
    log_hi = np.cumsum(np.log(gamma_hi.values(idx_hi)))  # prod_{0..m}
    idx_lo = np.arange(span_lo, span_hi + 1)
    log_lo_vals = np.log(gamma_lo.values(idx_lo))
    csum_lo = np.concatenate([[0.0], np.cumsum(log_lo_vals)])

    def lo_partial(a: int, b: int) -> float:
        # log prod_{i=a..b} gamma_lo(i); empty range (b < a) gives 0
        if b < a:
            return 0.0
        return float(csum_lo[b - span_lo + 1] - csum_lo[a - span_lo])

    per_k = []
    for k in range(k_lo, k_hi + 1):
        logs = [float(log_hi[m]) - lo_partial(k, m + k) for m in range(0, m_hi + 1)]
        best_m = int(np.argmax(logs))
        per_k.append({
            "k": k,
            "max_log_product": logs[best_m],
            "max_product": math.exp(logs[best_m]) if logs[best_m] < 700 else math.inf,
            "m_attained": best_m,
        })
    min_k = min(per_k, key=lambda d: d["max_log_product"])
    passed = min_k["max_log_product"] >= math.log(bound)
    return Certificate(
        claim="rosenblum-kernel-vanishing",
        passed=bool(passed),
        evidence={
            "per_k": per_k,
            "min_over_k_max_product": min_k["max_product"],
            "k_attained": min_k["k"],
            "threshold": bound,
            "sampled_gap_ratio": worst,
        },
        params={
            "gap_ratio": gap_ratio,
            "n_max": n_max,
            "bound": bound,
            "k_range": [k_lo, k_hi],
            "gamma_hi": seq_to_json(gamma_hi),
            "gamma_lo": seq_to_json(gamma_lo),
        },
    )


def truncated_commutant_dim(block: DenseBlock, tol: float = 1e-9) -> dict:
    """Nullspace dimension of X -> TX - XT over the window.

    Finite truncations of shifts have inflated commutants (polynomials in
    a Jordan block), so this is a diagnostic, not an irreducibility test.
    """
    a = block.data
    n = a.shape[0]
    if a.shape[0] != a.shape[1]:
        raise ValueError("square block required")
    if n > 64:
        raise ValueError("resource guard: blocks up to 64x64 only")
    eye = np.eye(n)
    syl = np.kron(eye, a) - np.kron(a.T, eye)
    svals = np.linalg.svd(syl, compute_uv=False)
    smax = float(svals[0])
    if smax == 0.0:
        return {"dimension": n * n, "smallest_nonzero_sv": 0.0}
    cut = tol * smax
    dim = int(np.sum(svals < cut))
    nonzero = svals[svals >= cut]
    return {
        "dimension": dim,
        "smallest_nonzero_sv": float(nonzero[-1]) if len(nonzero) else 0.0,
    }
