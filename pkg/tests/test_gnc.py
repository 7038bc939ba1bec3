import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from godl.dictionary import Dictionary, OdlConfig
from godl.errors import AllOutliers
from godl.gnc import (
    GncConfig,
    frame_error,
    frame_errors,
    gm_cost,
    godl_train,
    init_mu,
    mu_schedule,
    odl_train,
    train_all,
    update_weights,
)
from godl.sparse_coding import FistaConfig
from oracles import bruteforce_weight

pos = st.floats(0.01, 100.0, allow_nan=False)


def test_gm_cost_examples():
    assert gm_cost(0.0, 3.0, 2.0) == 0.0
    assert gm_cost(6.0, 3.0, 2.0) == pytest.approx(3.0)  # e2 = mu c2 -> half the asymptote
    assert gm_cost(1e12, 3.0, 2.0) == pytest.approx(6.0, rel=1e-9)


@settings(max_examples=200)
@given(e1=st.floats(0, 1e3), e2=st.floats(0, 1e3), mu=pos, c2=pos)
def test_gm_cost_monotone_and_bounded(e1, e2, mu, c2):
    lo, hi = sorted((e1, e2))
    assert gm_cost(lo, mu, c2) <= gm_cost(hi, mu, c2) + 1e-12
    assert gm_cost(hi, mu, c2) <= mu * c2 * (1 + 1e-15)


def test_update_weights_examples():
    assert update_weights(6.0, 3.0, 2.0) == pytest.approx(0.5)
    assert update_weights(3.0, 1.0, 1.0) == pytest.approx(0.25)
    assert update_weights(0.0, 1.0, 1.0) == 1.0


@settings(max_examples=200)
@given(e2=st.floats(0, 100), mu=st.floats(1, 100), c2=st.floats(0.01, 10))
def test_black_rangarajan_duality(e2, mu, c2):
    w_star, v_star = bruteforce_weight(e2, mu, c2)
    assert v_star == pytest.approx(float(gm_cost(e2, mu, c2)), abs=1e-6)
    assert float(update_weights(e2, mu, c2)) == pytest.approx(w_star, abs=1e-4)
    # closed form attains the GM cost exactly
    w = float(update_weights(e2, mu, c2))
    assert w * w * e2 + mu * c2 * (w - 1) ** 2 == pytest.approx(float(gm_cost(e2, mu, c2)), abs=1e-10)


def test_init_mu_and_schedule():
    assert init_mu([1.0, 8.0, 3.0], 4.0) == 4.0
    np.testing.assert_allclose(mu_schedule(4.0), [4, 4 / 1.4, 4 / 1.4**2, 4 / 1.4**3, 4 / 1.4**4])
    assert mu_schedule(0.5) == [0.5]
    for mu0 in (1.01, 4.0, 100.0):
        assert len(mu_schedule(mu0)) == math.floor(math.log(mu0, 1.4)) + 1


def test_init_mu_requires_errors():
    with pytest.raises(ValueError):
        init_mu([], 1.0)


def test_frame_error_examples(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((6, 2)))
    y = Q @ np.array([0.7, -1.2])
    e2, _ = frame_error(y, Dictionary(Q), 0.0, FistaConfig(max_iter=5000, tol=1e-16))
    assert e2 <= 1e-10
    y = rng.standard_normal(5)
    e2, x = frame_error(y, Dictionary((y / np.linalg.norm(y))[:, None]), 0.0)
    assert e2 <= 1e-10
    assert x[0] == pytest.approx(np.linalg.norm(y))


def test_frame_error_has_no_half(rng):
    D = Dictionary(np.eye(3)[:, :2])
    y = np.array([3.0, 0.5, 2.0])
    e2, x = frame_error(y, D, 1.0)
    # codes (2, 0); residual (1, 0.5, 2) -> 1 + 0.25 + 4; l1 = 2
    np.testing.assert_allclose(x, [2.0, 0.0], atol=1e-12)
    assert e2 == pytest.approx(5.25 + 2.0)


def test_frame_errors_dimension_check(rng):
    D = Dictionary(np.eye(3))
    with pytest.raises(ValueError):
        frame_errors(np.ones((4, 2)), D, 0.1)


def six_frame_unit(seed, corrupt=(1, 4), noise=0.01, magnitude=0.5):
    """Six frames near a fixed pose, two of them with uniform corruption."""
    r = np.random.default_rng(seed)
    pose = r.uniform(0.0, 1.0, 30)
    Y = pose[:, None] + r.normal(0.0, noise, (30, 6))
    Y[:, list(corrupt)] += r.uniform(-magnitude, magnitude, (30, len(corrupt)))
    return Y


def test_corrupted_frames_end_below_clean():
    Y = six_frame_unit(0)
    res = godl_train(Y, OdlConfig(), GncConfig(), seed=0, n_atoms=1)
    w = res.weights
    clean = np.delete(w, [1, 4])
    assert w[[1, 4]].max() < clean.min()
    assert len(res.history) >= 2


def test_stats_use_inliers_only():
    Y = six_frame_unit(1)
    res = godl_train(Y, OdlConfig(), GncConfig(), seed=0, n_atoms=1)
    keep = res.weights >= 0.6
    e = res.history[-1].errors
    assert res.e_mean == pytest.approx(e[keep].mean())
    assert res.e_std == pytest.approx(e[keep].std())


def test_clean_data_matches_baseline_objective(rng):
    Y = six_frame_unit(2, corrupt=())
    g = godl_train(Y, OdlConfig(), GncConfig(), seed=0, n_atoms=1)
    o = odl_train(Y, OdlConfig(), seed=0, n_atoms=1)
    eg, _ = frame_errors(Y, g.dictionary, 0.01)
    eo, _ = frame_errors(Y, o.dictionary, 0.01)
    assert eg.sum() <= 1.05 * eo.sum()


def test_all_outliers_raises():
    Y = six_frame_unit(3, corrupt=(), noise=0.0) * 100.0
    with pytest.raises(AllOutliers):
        # tiny c2 and lambda pushing every error far beyond it
        godl_train(Y, OdlConfig(lam=1.0), GncConfig(c2=1e-6), seed=0, n_atoms=1)


def test_deterministic_per_seed():
    Y = six_frame_unit(4)
    a = godl_train(Y, OdlConfig(), GncConfig(), seed=5, n_atoms=2)
    b = godl_train(Y, OdlConfig(), GncConfig(), seed=5, n_atoms=2)
    assert np.array_equal(a.dictionary.atoms, b.dictionary.atoms)
    assert np.array_equal(a.weights, b.weights)


def test_config_validation():
    with pytest.raises(ValueError):
        GncConfig(c2=0)
    with pytest.raises(ValueError):
        GncConfig(mu_divisor=1.0)
    with pytest.raises(ValueError):
        GncConfig(inlier_weight_cutoff=1.0)


def test_train_all_builds_model(rng):
    subs = [six_frame_unit(s, corrupt=()) for s in range(3)]
    model = train_all(subs, OdlConfig(atom_dims=[1, 1, 2]), GncConfig(), seed=0)
    assert len(model.units) == 3
    assert [u.unit_label for u in model.units] == ["unit 1", "unit 2", "unit 3"]
    assert model.lam == 0.01 and model.c2 == 0.5


def test_train_all_names_failing_unit():
    clean = six_frame_unit(0, corrupt=())
    junk = np.random.default_rng(0).standard_normal(clean.shape) * 100
    with pytest.raises(AllOutliers, match="unit 2"):
        train_all([clean, junk], OdlConfig(atom_dims=[1, 1]), GncConfig(), seed=0)
