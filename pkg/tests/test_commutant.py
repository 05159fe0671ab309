"""Commutant/intertwiner obstruction ratios and the Sylvester diagnostic."""

import math

import numpy as np
import pytest

from shiftlab import seqcore as sq
from shiftlab.commutant import (
    commutant_obstruction,
    diagonal_identity_certificate,
    rosenblum_obstruction,
    truncated_commutant_dim,
)
from shiftlab.opcore import DenseBlock


def geom_bilateral():
    # lam_n = 2^{-|n|}
    return sq.two_sided(sq.geometric(1.0, 0.5), sq.geometric(1.0, 0.5))


def harmonic_bilateral():
    # lam_n = 1/(|n|+1)
    return sq.two_sided(sq.harmonic_shift(1.0, 1.0), sq.harmonic_shift(1.0, 1.0))


def make_block(mat):
    mat = np.asarray(mat, dtype=complex)
    n = mat.shape[0]
    labels = np.arange(n)
    return DenseBlock(labels, labels.copy(), mat, np.ones(mat.shape, bool))


def test_obstruction_geometric_k1():
    cert = commutant_obstruction(geom_bilateral(), k=1, n_max=30)
    assert cert.passed
    assert cert.evidence["max_ratio"] >= 1e9
    # lam_0 / lam_30 = 2^30 at i = 30
    assert cert.evidence["max_ratio"] == pytest.approx(2.0**30, rel=1e-9)
    assert abs(cert.evidence["index_attained"]) == 30


def test_obstruction_constant_fails():
    cert = commutant_obstruction(sq.constant(1.0, "bilateral"), k=1, n_max=30)
    assert not cert.passed
    assert max(cert.evidence["ratios"]) == pytest.approx(1.0)


def test_obstruction_harmonic_k2_closed_form():
    cert = commutant_obstruction(harmonic_bilateral(), k=2, n_max=20, bound=100.0)
    assert cert.passed
    ratios = dict(zip(cert.evidence["indices"], cert.evidence["ratios"]))
    # forward chain telescopes to (lam_0 lam_1)/(lam_i lam_{i+1})
    i = 20
    want = (1.0 * 0.5) / ((1.0 / 21.0) * (1.0 / 22.0))
    assert ratios[i] == pytest.approx(want, rel=1e-12)
    assert want == 231.0


def test_obstruction_ratios_match_partial_product_oracle():
    lam = geom_bilateral()
    k = 3
    cert = commutant_obstruction(lam, k=k, n_max=12)
    ratios = dict(zip(cert.evidence["indices"], cert.evidence["ratios"]))
    for i in range(1, 13):
        want = (
            sq.partial_product(lam, 0, i - 1).value
            / sq.partial_product(lam, k, i + k - 1).value
        )
        assert ratios[i] == pytest.approx(want, rel=1e-12)
    for i in range(-12, 0):
        want = (
            sq.partial_product(lam, i + k, k - 1).value
            / sq.partial_product(lam, i, -1).value
        )
        assert ratios[i] == pytest.approx(want, rel=1e-12)


def test_obstruction_monotone_growth_for_vanishing_weights():
    for lam, k in ((geom_bilateral(), 1), (harmonic_bilateral(), 2)):
        cert = commutant_obstruction(lam, k=k, n_max=25)
        ratios = dict(zip(cert.evidence["indices"], cert.evidence["ratios"]))
        fwd = [ratios[i] for i in range(5, 26)]
        bwd = [ratios[-i] for i in range(5, 26)]
        assert all(a < b for a, b in zip(fwd, fwd[1:]))
        assert all(a < b for a, b in zip(bwd, bwd[1:]))


def test_obstruction_k0_rejected_and_diagonal_identity():
    with pytest.raises(ValueError):
        commutant_obstruction(geom_bilateral(), k=0, n_max=5)
    cert = diagonal_identity_certificate(geom_bilateral(), 50)
    assert cert.passed
    assert cert.evidence["coefficients_all_one"]


def test_rosenblum_constant_blocks():
    cert = rosenblum_obstruction(
        sq.constant(2.0, "bilateral"), sq.constant(1.0, "bilateral"),
        gap_ratio=2.0, n_max=30, k_range=(0, 0),
    )
    assert cert.passed
    # R(m, 0) = 2^{m+1}
    assert cert.evidence["min_over_k_max_product"] == pytest.approx(2.0**31, rel=1e-9)


def test_rosenblum_requires_gap():
    with pytest.raises(ValueError):
        rosenblum_obstruction(
            sq.constant(1.0, "bilateral"), sq.constant(1.0, "bilateral"),
            gap_ratio=1.0, n_max=10,
        )
    with pytest.raises(ValueError):
        rosenblum_obstruction(
            sq.constant(1.0, "bilateral"), sq.constant(1.0, "bilateral"),
            gap_ratio=1.5, n_max=10,
        )


def test_rosenblum_banded_values():
    hi = sq.cyclic([1.5, 2.0, 1.75], domain="bilateral")
    lo = sq.cyclic([0.9, 1.0, 0.95], domain="bilateral")
    cert = rosenblum_obstruction(hi, lo, gap_ratio=1.5, n_max=50, k_range=(-2, 2))
    assert cert.passed
    # every factor ratio is >= 1.5, so max_m R >= 1.5^{m+1} at m = 50
    assert cert.evidence["min_over_k_max_product"] >= 1.5**51 / 10


def test_commutant_dim_identity():
    out = truncated_commutant_dim(make_block(np.eye(4)))
    assert out["dimension"] == 16


def test_commutant_dim_distinct_diagonal():
    out = truncated_commutant_dim(make_block(np.diag([1.0, 2.0, 3.0])))
    assert out["dimension"] == 3
    assert out["smallest_nonzero_sv"] > 0


def test_commutant_dim_jordan_block():
    n = 5
    jord = np.diag(np.ones(n - 1), -1)
    out = truncated_commutant_dim(make_block(jord))
    # brute-force oracle: nullspace of the Sylvester map
    eye = np.eye(n)
    syl = np.kron(eye, jord) - np.kron(jord.T, eye)
    rank = np.linalg.matrix_rank(syl)
    assert out["dimension"] == n * n - rank == 5


def test_commutant_dim_conjugation_invariant():
    rng = np.random.default_rng(3)
    a = np.diag([1.0, 1.0, 2.0, 3.0]) + np.diag([0.5, 0.0, 0.25], -1)
    perm = np.eye(4)[rng.permutation(4)]
    out1 = truncated_commutant_dim(make_block(a))
    out2 = truncated_commutant_dim(make_block(perm @ a @ perm.T))
    assert out1["dimension"] == out2["dimension"]


def test_commutant_dim_guard():
    with pytest.raises(ValueError):
        truncated_commutant_dim(make_block(np.eye(65)))
