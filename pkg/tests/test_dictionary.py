import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from godl.dictionary import (
    Dictionary,
    OdlConfig,
    SurrogateStats,
    init_dictionary,
    odl_baseline,
    odl_fit,
    update_coefficients,
    update_dictionary,
    weighted_objective,
)
from godl.sparse_coding import FistaConfig
from oracles import atom_minimizer_pg, surrogate


def random_stats(r, m=6, k=4, n=12):
    Y = r.standard_normal((m, n))
    X = r.standard_normal((k, n))
    return Y, X, SurrogateStats.from_codes(Y, X)


def test_dictionary_rejects_long_atoms():
    with pytest.raises(ValueError):
        Dictionary(np.array([[1.1], [0.0]]))
    Dictionary(np.array([[1.0 + 1e-13], [0.0]]))


def test_init_dictionary_unit_norm_columns_of_data(rng):
    Y = rng.standard_normal((5, 20))
    D = init_dictionary(Y, 4, seed=3)
    np.testing.assert_allclose(np.linalg.norm(D.atoms, axis=0), 1.0, atol=1e-12)
    # each atom is a rescaled data column
    for j in range(4):
        cos = np.abs(D.atoms[:, j] @ Y) / np.linalg.norm(Y, axis=0)
        assert cos.max() == pytest.approx(1.0, abs=1e-12)


def test_init_dictionary_more_atoms_than_columns(rng):
    Y = rng.standard_normal((5, 2))
    D = init_dictionary(Y, 4, seed=0)
    assert D.atoms.shape == (5, 4)


def test_init_dictionary_zero_column_gets_random_unit_atom():
    D = init_dictionary(np.zeros((4, 3)), 2, seed=0)
    np.testing.assert_allclose(np.linalg.norm(D.atoms, axis=0), 1.0)


def test_surrogate_matches_oracle_and_frobenius(rng):
    Y, X, stats = random_stats(rng)
    D = rng.standard_normal((6, 4))
    assert stats.value(D) == pytest.approx(surrogate(D, stats.E, stats.F), rel=1e-12)
    # ||Y - D X||_F^2 = tr(Y^T Y) + surrogate
    lhs = np.linalg.norm(Y - D @ X) ** 2
    assert lhs == pytest.approx(np.sum(Y * Y) + stats.value(D), abs=1e-8)


def test_sweep_does_not_increase_surrogate(rng):
    for _ in range(20):
        _, _, stats = random_stats(rng)
        D = Dictionary(init_dictionary(rng.standard_normal((6, 10)), 4, 0).atoms)
        D2 = update_dictionary(D, stats)
        assert stats.value(D2) <= stats.value(D) + 1e-10
        assert np.all(np.linalg.norm(D2.atoms, axis=0) <= 1 + 1e-12)


def test_single_atom_update_is_exact_block_minimizer(rng):
    _, _, stats = random_stats(rng, k=1)
    D = init_dictionary(rng.standard_normal((6, 3)), 1, 0)
    D2 = update_dictionary(D, stats)
    ref = atom_minimizer_pg(D.atoms, stats.E, stats.F, 0)
    np.testing.assert_allclose(D2.atoms, ref, atol=1e-6)


def test_unused_atom_is_left_untouched(rng):
    Y = rng.standard_normal((5, 8))
    X = rng.standard_normal((3, 8))
    X[1] = 0.0
    D = init_dictionary(rng.standard_normal((5, 6)), 3, 1)
    D2 = update_dictionary(D, SurrogateStats.from_codes(Y, X))
    np.testing.assert_array_equal(D2.atoms[:, 1], D.atoms[:, 1])


def test_zero_weight_column_codes_to_zero(rng):
    D = init_dictionary(rng.standard_normal((5, 8)), 3, 0)
    Y = rng.standard_normal((5, 4))
    w = np.array([1.0, 0.0, 0.5, 1.0])
    X = update_coefficients(D, Y * w, 0.1 * w)
    assert np.all(X[:, 1] == 0.0)


def test_update_coefficients_checks_lengths(rng):
    D = init_dictionary(rng.standard_normal((5, 8)), 3, 0)
    with pytest.raises(ValueError):
        update_coefficients(D, np.ones((5, 4)), np.ones(3))


def test_realizable_data_fits_quickly(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((8, 3)))
    Y = Q @ rng.standard_normal((3, 30))
    cfg = OdlConfig(lam=0.0, fista=FistaConfig(max_iter=5000, tol=1e-15))
    fit = odl_fit(Y, np.zeros(30), Dictionary(Q), cfg)
    assert fit.trace[min(2, len(fit.trace) - 1)] <= 1e-10


def test_odl_trace_non_increasing(rng):
    Y = rng.standard_normal((10, 40))
    D0 = init_dictionary(Y, 4, 0)
    fit = odl_fit(Y, np.full(40, 0.1), D0, OdlConfig(lam=0.1, inner_max_iter=30, conv_tol=1e-12))
    assert np.all(np.diff(fit.trace) <= 1e-9 * max(fit.trace))


def test_unit_weights_bit_match_baseline(rng):
    Y = rng.standard_normal((10, 25))
    cfg = OdlConfig(lam=0.05)
    D0 = init_dictionary(Y, 4, 2)
    a = odl_fit(Y * np.ones(25), cfg.lam * np.ones(25), D0, cfg)
    b = odl_baseline(Y, D0, cfg)
    assert np.array_equal(a.dictionary.atoms, b.dictionary.atoms)
    assert np.array_equal(a.codes, b.codes)


def test_weighted_objective_formula(rng):
    D = init_dictionary(rng.standard_normal((4, 5)), 2, 0)
    Y, X = rng.standard_normal((4, 3)), rng.standard_normal((2, 3))
    lw = np.array([0.1, 0.2, 0.3])
    R = Y - D.atoms @ X
    expect = 0.5 * np.sum(R * R) + np.sum(lw * np.abs(X).sum(0))
    assert weighted_objective(D, Y, X, lw) == pytest.approx(expect, rel=1e-14)


def test_config_validation():
    with pytest.raises(ValueError):
        OdlConfig(lam=-1)
    with pytest.raises(ValueError):
        OdlConfig(atom_dims=[3, 0])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 100_000), m=st.integers(2, 8), k=st.integers(1, 6))
def test_sweep_monotone_property(seed, m, k):
    r = np.random.default_rng(seed)
    Y, X = r.standard_normal((m, 3 * k)), r.standard_normal((k, 3 * k))
    stats = SurrogateStats.from_codes(Y, X)
    D = init_dictionary(r.standard_normal((m, k + 2)), k, seed)
    D2 = update_dictionary(D, stats)
    assert stats.value(D2) <= stats.value(D) + 1e-10
    assert np.all(np.linalg.norm(D2.atoms, axis=0) <= 1 + 1e-12)
