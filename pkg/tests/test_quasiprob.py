import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_full_rank_gamma, random_standard_form_gamma
from rebitkit import pauli_core as pc
from rebitkit import quasiprob as qp
from rebitkit import standard_form as sf

NF = pc.NumberField


def rebit_table_oracle(gz, gx):
    """Direct evaluation of the closed-form rebit weight formula."""
    u = (1.0 - abs(gz) - abs(gx)) / 8.0
    t = np.zeros((4, 4))
    t[:2, :2] = u + np.array([[abs(gz) + gz, abs(gz) - gz], [abs(gz) - gz, abs(gz) + gz]]) / 4
    t[2:, 2:] = u + np.array([[abs(gx) + gx, abs(gx) - gx], [abs(gx) - gx, abs(gx) + gx]]) / 4
    return t


def test_pstd_rebit_cfr_uniform_eighths():
    for g in (pc.cfr_state(1.0), np.diag([1.0, 0, 0, 0])):
        p = qp.pstd_rebit(g)
        expected = np.zeros((4, 4))
        expected[:2, :2] = 0.125
        expected[2:, 2:] = 0.125
        np.testing.assert_allclose(p, expected, atol=1e-15)
        assert p.sum() == pytest.approx(1.0, abs=1e-12)


def test_pstd_rebit_bell_like_negative():
    g = np.diag([1.0, 1.0, -1.0, 0.0])
    p = qp.pstd_rebit(g)
    np.testing.assert_allclose(p, rebit_table_oracle(1.0, -1.0), atol=1e-15)
    # uniform term is (1 - 1 - 1)/8 = -1/8
    assert p[0, 1] == pytest.approx(-0.125)
    assert p[0, 0] == pytest.approx(-0.125 + 0.5)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)


def test_pstd_rebit_rejects_offdiagonal():
    g = pc.cfr_state(1.0)
    g[0, 1] = 0.2
    with pytest.raises(ValueError, match="standard form"):
        qp.pstd_rebit(g)


def test_pstd_qubit_cfr():
    p = qp.pstd_qubit(pc.cfr_state(1.0))
    expected = np.zeros((6, 6))
    expected[4, 4] = expected[5, 5] = 0.5
    np.testing.assert_allclose(p, expected, atol=1e-15)


def test_pstd_qubit_mixed_twelfths():
    p = qp.pstd_qubit(np.diag([1.0, 0, 0, 0]))
    expected = np.zeros((6, 6))
    for b in range(3):
        expected[2 * b : 2 * b + 2, 2 * b : 2 * b + 2] = 1.0 / 12.0
    np.testing.assert_allclose(p, expected, atol=1e-15)


def test_pstd_qubit_bell():
    # Q = 1 - 1 - 1 - 1 = -2: uniform -1/6 plus 1/2 on the aligned slots
    p = qp.pstd_qubit(np.diag([1.0, 1.0, 1.0, -1.0]))
    assert p[0, 0] == pytest.approx(-1 / 6 + 1 / 2)  # (H, H)
    assert p[0, 1] == pytest.approx(-1 / 6)          # (H, V)
    assert p[4, 5] == pytest.approx(-1 / 6 + 1 / 2)  # (R, L)
    assert p[4, 4] == pytest.approx(-1 / 6)          # (R, R)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    assert p.min() < 0


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_weight_normalization_random_diagonals(seed):
    rng = np.random.default_rng(seed)
    g = random_standard_form_gamma(rng)
    assert qp.pstd_rebit(g).sum() == pytest.approx(1.0, abs=1e-12)
    assert qp.pstd_qubit(g).sum() == pytest.approx(1.0, abs=1e-12)


def test_pstd_reconstructs_standard_form():
    rng = np.random.default_rng(8)
    for _ in range(20):
        g = random_standard_form_gamma(rng)
        # qubit expansion resolves everything
        p = qp.pstd_qubit(g)
        rec = np.zeros((4, 4))
        for i, la in enumerate(qp.QUBIT_ALPHABET):
            for j, lb in enumerate(qp.QUBIT_ALPHABET):
                rec += p[i, j] * np.outer(
                    pc.POLARIZATION_BLOCH[la], pc.POLARIZATION_BLOCH[lb]
                )
        np.testing.assert_allclose(rec, g, atol=1e-12)
        # rebit expansion resolves everything but the y-y entry
        p = qp.pstd_rebit(g)
        rec = np.zeros((4, 4))
        for i, la in enumerate(qp.REBIT_ALPHABET):
            for j, lb in enumerate(qp.REBIT_ALPHABET):
                rec += p[i, j] * np.outer(
                    pc.POLARIZATION_BLOCH[la], pc.POLARIZATION_BLOCH[lb]
                )
        expected = g.copy()
        expected[3, 3] = 0.0
        np.testing.assert_allclose(rec, expected, atol=1e-12)


def test_transform_identity_maps():
    p = qp.pstd_qubit(pc.cfr_state(1.0))
    maps = sf.LocalMapPair(np.eye(4), np.eye(4), NF.COMPLEX)
    d = qp.transform_quasi(p, maps)
    np.testing.assert_allclose(d.weight_table(), p, atol=1e-15)
    for alice, bob, _ in d.entries:
        np.testing.assert_array_equal(alice.bloch, pc.POLARIZATION_BLOCH[alice.label])


def test_transform_filter_rescales_weights():
    # a pure Alice-side scaling filter: weights scale with the pulled-back
    # time components and renormalize
    a_map = np.diag([1.0, 2.0, 2.0, 2.0])
    maps = sf.LocalMapPair(a_map, np.eye(4), NF.COMPLEX)
    p = qp.pstd_qubit(np.diag([1.0, 0, 0, 0]))
    d = qp.transform_quasi(p, maps)
    assert sum(w for _, _, w in d.entries) == pytest.approx(1.0, abs=1e-12)
    # oracle: every pulled-back component is (1, +-1/2, ...) with time part 1
    for alice, _, _ in d.entries:
        assert alice.bloch[0] == pytest.approx(1.0)


def test_transform_annihilation_error():
    # map whose inverse sends H to a vector with zero time component
    a_map = np.eye(4)
    a_map[0, 1] = -1.0  # inverse maps (1, 1, 0, 0) -> (0, ...)
    maps = sf.LocalMapPair(a_map, np.eye(4), NF.COMPLEX)
    p = qp.pstd_qubit(np.diag([1.0, 0, 0, 0]))
    with pytest.raises(ValueError, match="annihilates"):
        qp.transform_quasi(p, maps)


def test_local_reconstruction_single_entry():
    d = qp.QuasiDecomposition(
        entries=[(pc.polarization_state("H"), pc.polarization_state("H"), 1.0)],
        field=NF.REAL,
    )
    rec = qp.local_reconstruction(d)
    np.testing.assert_array_equal(
        rec, np.outer(pc.POLARIZATION_BLOCH["H"], pc.POLARIZATION_BLOCH["H"])
    )
    assert rec[0, 0] == 1.0


def test_decompose_cfr_complex():
    d, dist = qp.decompose(pc.cfr_state(1.0), NF.COMPLEX)
    assert dist < 1e-12
    table = d.weight_table()
    assert table[4, 4] == pytest.approx(0.5, abs=1e-14)
    assert table[5, 5] == pytest.approx(0.5, abs=1e-14)
    assert np.abs(table).sum() == pytest.approx(1.0, abs=1e-12)
    assert d.residual_coeff == 0.0
    assert qp.separability_certificate(d)


def test_decompose_cfr_rebit():
    d, dist = qp.decompose(pc.cfr_state(1.0), NF.REAL)
    assert dist == pytest.approx(0.5, abs=1e-12)
    assert d.residual_coeff == pytest.approx(0.25, abs=1e-14)
    expected = np.zeros((4, 4))
    expected[:2, :2] = 0.125
    expected[2:, 2:] = 0.125
    np.testing.assert_allclose(d.weight_table(), expected, atol=1e-14)
    assert not qp.separability_certificate(d)


def test_decompose_mixed_both_fields():
    g = np.diag([1.0, 0, 0, 0])
    for field in (NF.REAL, NF.COMPLEX):
        d, dist = qp.decompose(g, field)
        assert dist < 1e-12
        assert qp.separability_certificate(d)


def test_decompose_bell_complex_negative_weights():
    d, dist = qp.decompose(np.diag([1.0, 1.0, 1.0, -1.0]), NF.COMPLEX)
    assert dist < 1e-12
    assert min(w for _, _, w in d.entries) < -1e-3
    assert not qp.separability_certificate(d)


def test_complex_completeness_random_states():
    rng = np.random.default_rng(12)
    for _ in range(100):
        g = random_full_rank_gamma(rng)
        _, dist = qp.decompose(g, NF.COMPLEX)
        assert dist < 1e-8


def test_rebit_distance_identity_standard_form():
    rng = np.random.default_rng(13)
    for _ in range(40):
        g = random_standard_form_gamma(rng)
        d, dist = qp.decompose(g, NF.REAL)
        rho_y = g[3, 3] / 4.0
        assert abs(dist - 2.0 * abs(rho_y)) < 1e-10
        assert d.residual_coeff == pytest.approx(rho_y, abs=1e-12)


def test_rebit_reconstruction_matches_all_but_yy():
    rng = np.random.default_rng(14)
    for _ in range(20):
        g = random_standard_form_gamma(rng)
        d, _ = qp.decompose(g, NF.REAL)
        rec = qp.local_reconstruction(d)
        expected = g.copy()
        expected[3, 3] = 0.0
        np.testing.assert_allclose(rec, expected, atol=1e-10)


def test_transform_commutes_with_map_application():
    # reconstructing the transformed weights equals back-transforming the
    # standard-form reconstruction
    rng = np.random.default_rng(15)
    for _ in range(10):
        g = random_full_rank_gamma(rng)
        result = sf.to_standard_form(g, NF.COMPLEX)
        p = qp.pstd_qubit(result.gamma_std)
        d = qp.transform_quasi(p, result.maps)
        path_one = qp.local_reconstruction(d)
        std_rec = np.zeros((4, 4))
        for i, la in enumerate(qp.QUBIT_ALPHABET):
            for j, lb in enumerate(qp.QUBIT_ALPHABET):
                std_rec += p[i, j] * np.outer(
                    pc.POLARIZATION_BLOCH[la], pc.POLARIZATION_BLOCH[lb]
                )
        path_two = sf.apply_local_maps(std_rec, result.maps)
        np.testing.assert_allclose(path_one, path_two, atol=1e-10)


def test_certificate_tolerates_tiny_negativity():
    d = qp.QuasiDecomposition(
        entries=[
            (pc.polarization_state("H"), pc.polarization_state("H"), 1.0 + 1e-12),
            (pc.polarization_state("V"), pc.polarization_state("V"), -1e-12),
        ],
        field=NF.COMPLEX,
    )
    assert qp.separability_certificate(d, tol=1e-9)
    assert not qp.separability_certificate(d, tol=1e-15)
