"""Spectral radius, shift spectra, and Fredholm kernel/index evidence."""

import math

import numpy as np
import pytest

from shiftlab import seqcore as sq
from shiftlab.opcore import Diagonal, TruncationWindow, WeightedShift, truncate, apply
from shiftlab.spectral import (
    GapError,
    fredholm_index_certificate,
    fredholm_kernel,
    shift_spectrum,
    spectral_radius_estimate,
)


def two_sided_const(a, b):
    return sq.two_sided(sq.constant(a), sq.constant(b))


def test_radius_zero_diagonal():
    w = TruncationWindow(0, 31, "unilateral")
    out = spectral_radius_estimate(Diagonal(sq.constant(0.0)), w, 4)
    assert out["estimate"] == 0.0


def test_radius_harmonic_diagonal_is_max_entry():
    w = TruncationWindow(0, 255, "unilateral")
    out = spectral_radius_estimate(Diagonal(sq.harmonic_shift(1.0, 1.0)), w, 8)
    assert out["estimate"] == 1.0  # sup attained at n=0; diagonal powers exact


def test_radius_bilateral_shift_bracket():
    t = WeightedShift(sq.constant(1.0, "bilateral"))
    out = spectral_radius_estimate(t, TruncationWindow(-256, 256), 32)
    assert 0.90 <= out["estimate"] <= 1.0
    assert len(out["table"]) == 32


def test_radius_monotone_in_window():
    t = WeightedShift(sq.constant(1.0, "bilateral"))
    vals = [
        spectral_radius_estimate(t, TruncationWindow(-s // 2, s // 2), 16)["estimate"]
        for s in (64, 128, 256, 512)
    ]
    assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))


def test_radius_diagonal_matches_window_max():
    seq = sq.two_sided(sq.harmonic_shift(1.0, 2.0), sq.geometric(0.5, 0.5))
    w = TruncationWindow(-64, 64)
    out = spectral_radius_estimate(Diagonal(seq), w, 6)
    want = float(np.abs(seq.values(w.indices())).max())
    assert out["estimate"] == pytest.approx(want, rel=1e-12)


def test_shift_spectrum_constant_circle():
    for c in (0.5, 1.0, 2.0, 3.7):
        sp = shift_spectrum(sq.constant(c, "bilateral"))
        assert sp.shape == "annulus"
        assert sp.r_inner == c and sp.r_outer == c
        assert sp.provenance["rigorous"] is True


def test_shift_spectrum_two_sided_annulus_vs_bruteforce():
    sp = shift_spectrum(two_sided_const(2.0, 0.5))
    assert sp.shape == "annulus"
    assert sp.r_inner == 0.5 and sp.r_outer == 2.0
    # brute-force oracle: k-window products over k <= 64
    w = two_sided_const(2.0, 0.5)
    ns = np.arange(-256, 257)
    logs = np.log(w.values(ns))
    k = 64
    csum = np.concatenate([[0.0], np.cumsum(logs)])
    means = (csum[k:] - csum[:-k]) / k
    assert math.exp(means.max()) == pytest.approx(sp.r_outer, rel=1e-9)
    assert math.exp(means.min()) == pytest.approx(sp.r_inner, rel=1e-9)


def test_shift_spectrum_harmonic_disc():
    w = sq.two_sided(sq.harmonic_shift(1.0, 1.0), sq.harmonic_shift(1.0, 1.0))
    sp = shift_spectrum(w)
    assert sp.shape == "disc"
    assert sp.r_outer == 0.0
    # oracle: window products through the center collapse like 1/(k/2)!^2
    k = 40
    prod = sq.partial_product(w, -k // 2, k // 2 - 1)
    assert prod.value ** (1.0 / k) < 0.3


def test_shift_spectrum_numeric_fallback_flagged():
    w = sq.cyclic([1.0, 2.0, 0.5, 1.5], domain="bilateral")
    sp = shift_spectrum(w)
    assert sp.provenance["method"] == "numeric_k64"
    assert sp.provenance["rigorous"] is False
    # geometric mean of one period = 1.10668...
    gm = (1.0 * 2.0 * 0.5 * 1.5) ** 0.25
    assert sp.shape == "annulus"
    assert sp.r_inner <= gm <= sp.r_outer


def test_shift_spectrum_rejects_nonpositive():
    with pytest.raises(ValueError):
        shift_spectrum(sq.constant(-1.0, "bilateral"))
    with pytest.raises(ValueError):
        shift_spectrum(sq.constant(1.0))  # unilateral


def test_kernel_two_one_half():
    w = TruncationWindow(-64, 64)
    kern = fredholm_kernel(two_sided_const(2.0, 0.5), 1.0, w)
    for n in range(-64, 65):
        assert kern.coeffs[n] == pytest.approx(2.0 ** (-abs(n)), abs=1e-12)
    assert kern.norm_sq_window == pytest.approx(5.0 / 3.0, abs=1e-10)
    assert kern.residual_interior <= 1e-10


def test_kernel_three_one_third():
    w = TruncationWindow(-40, 40)
    kern = fredholm_kernel(two_sided_const(3.0, 1.0 / 3.0), 1.0, w)
    for n in range(-40, 41):
        assert kern.coeffs[n] == pytest.approx(3.0 ** (-abs(n)), rel=1e-12)


def test_kernel_residual_via_apply():
    weights = two_sided_const(2.0, 0.5)
    w = TruncationWindow(-32, 32)
    kern = fredholm_kernel(weights, 1.25, w)
    from shiftlab.opcore import Scaled, Sum, identity

    tm = Sum((WeightedShift(weights), Scaled(-1.25, identity())))
    inner = TruncationWindow(-31, 31)
    vec = {n: v for n, v in kern.coeffs.items() if inner.lo <= n <= inner.hi}
    img = apply(tm, vec, TruncationWindow(-33, 33))
    interior = [abs(v) for i, v in img.items() if inner.lo + 1 <= i <= inner.hi]
    norm = math.sqrt(sum(v * v for v in vec.values()))
    assert math.sqrt(sum(v * v for v in interior)) / norm <= 1e-10


def test_kernel_tail_bound_is_upper_bound():
    weights = two_sided_const(2.0, 0.5)
    small = fredholm_kernel(weights, 1.0, TruncationWindow(-16, 16))
    # true tail beyond +-16: 2 * sum_{n>16} 4^-n
    true_tail = 2 * (4.0 ** (-17)) / (1 - 0.25)
    assert small.tail_sq_bound >= true_tail - 1e-30


def test_kernel_gap_errors():
    with pytest.raises(GapError):
        fredholm_kernel(two_sided_const(2.0, 0.5), 3.0, TruncationWindow(-8, 8))
    with pytest.raises(GapError):
        fredholm_kernel(sq.constant(1.0, "bilateral"), 0.5, TruncationWindow(-8, 8))


def test_index_certificate_passes_in_gap():
    w = TruncationWindow(-64, 64)
    cert = fredholm_index_certificate(two_sided_const(2.0, 0.5), 1.0, w)
    assert cert.passed
    assert cert.evidence["cokernel_sigma_deflated"] >= 1.0
    assert cert.evidence["proof_bound"] == 1.0


def test_index_certificate_near_gap_edge():
    w = TruncationWindow(-64, 64)
    cert = fredholm_index_certificate(two_sided_const(2.0, 0.5), 1.9, w)
    assert cert.passed
    assert cert.evidence["cokernel_sigma_deflated"] >= 0.1


def test_index_certificate_no_gap():
    with pytest.raises(GapError):
        fredholm_index_certificate(sq.constant(1.0, "bilateral"), 0.5, TruncationWindow(-8, 8))
