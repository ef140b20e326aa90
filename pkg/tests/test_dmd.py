import numpy as np
import pytest

from cjdmd.dictionary import build_dictionary, evaluate
from cjdmd.dmd import (
    CAUSAL_JUMP,
    HANKEL,
    KoopmanModel,
    extract_predictor,
    fit_causal_jump,
    fit_hankel_dmd,
    lag_coefficients,
    load_model,
    save_model,
)
from cjdmd.errors import InsufficientDataError, ModelFileError, ModelVersionError
from cjdmd.forecast import rollout
from cjdmd.nar import companion, simulate_nar


def geometric(a, n=40, y0=1.0):
    return y0 * a ** np.arange(n)


def test_hankel_scalar_linear():
    m = fit_hankel_dmd([geometric(0.5)], 1, build_dictionary(1, 1), 1)
    np.testing.assert_allclose(m.operator, [[0.5]], rtol=1e-12)
    assert m.training_residual < 1e-10
    assert m.variant == HANKEL


def test_hankel_lifted_square():
    # psi = [y, y^2] evolves exactly as diag(a, a^2)
    a = 0.9
    m = fit_hankel_dmd([geometric(a)], 1, build_dictionary(1, 2), 2)
    np.testing.assert_allclose(m.operator, [[a, 0.0], [0.0, a * a]], atol=1e-10)


def test_hankel_ar2_companion(ar2_series):
    m = fit_hankel_dmd([ar2_series], 2, build_dictionary(2, 1), 2)
    np.testing.assert_allclose(m.operator, companion(), atol=1e-10)


def test_causal_jump_geometric_rollout():
    y = geometric(0.5, 30)
    m = fit_causal_jump([y], 2, build_dictionary(2, 1), 2)
    # windows are all parallel to (1, 0.5): only rank 1 is available
    assert m.rank_used == 1
    pred = extract_predictor(m)(evaluate(m.dictionary, y[:2])[None])[0]
    np.testing.assert_allclose(pred, 0.25 * y[:2], atol=1e-8)
    f = rollout(m, y[:2], 20)
    np.testing.assert_allclose(f.predicted, y[2:22], atol=1e-8)


@pytest.mark.parametrize("tau", [1, 2, 4])
def test_causal_jump_constant_fixed_point(tau):
    y = np.full(30, 0.37)
    m = fit_causal_jump([y], tau, build_dictionary(tau, 1), 1)
    f = rollout(m, y[:tau], 20)
    np.testing.assert_allclose(f.predicted, 0.37, rtol=1e-12)


def test_causal_jump_ar2_two_step(ar2_series):
    m = fit_causal_jump([ar2_series], 2, build_dictionary(2, 1), 2)
    c2 = np.linalg.matrix_power(companion(), 2)
    rng = np.random.default_rng(3)
    for w in rng.normal(size=(10, 2)):
        np.testing.assert_allclose(extract_predictor(m)(w[None])[0], c2 @ w, atol=1e-8)


def test_extract_predictor_hankel_is_bottom_companion_row(ar2_series):
    m = fit_hankel_dmd([ar2_series], 2, build_dictionary(2, 1), 2)
    p = extract_predictor(m)
    assert p.advance == 1
    np.testing.assert_allclose(p.rows, [[-0.3, 1.1]], atol=1e-10)


def test_identity_operator_predictor_returns_window():
    d = build_dictionary(3, 2)
    m = KoopmanModel(np.eye(d.size), d, 3, 1, d.size, CAUSAL_JUMP)
    w = np.array([0.3, -1.2, 2.0])
    np.testing.assert_array_equal(extract_predictor(m)(evaluate(d, w)[None])[0], w)


def test_hankel_is_additive_across_lags(cross_lag_data):
    train, _ = cross_lag_data
    m = fit_hankel_dmd(train, 3, build_dictionary(3, 3), 9)
    assert all(np.count_nonzero(e) == 1 for e in m.dictionary.exponents)
    coef = lag_coefficients(m)
    pred = extract_predictor(m)
    rng = np.random.default_rng(0)
    for w in rng.uniform(-1, 1, size=(20, 3)):
        direct = pred(evaluate(m.dictionary, w)[None])[0, 0]
        by_lag = sum(np.polyval(np.r_[coef[i][::-1], 0.0], w[i]) for i in range(3))
        assert direct == pytest.approx(by_lag, abs=1e-12)
    # zero mixed second difference between any two lags
    f = lambda w: pred(evaluate(m.dictionary, np.asarray(w))[None])[0, 0]
    a, b, h = 0.4, 0.7, 0.3
    mixed = f([a + h, b + h, 0.5]) - f([a + h, b, 0.5]) - f([a, b + h, 0.5]) + f([a, b, 0.5])
    assert abs(mixed) < 1e-12


def test_causal_jump_carries_cross_lag_terms(cross_lag_data):
    train, _ = cross_lag_data
    d = build_dictionary(2, 2)
    m = fit_causal_jump(train, 2, d, d.size)
    cross = [i for i, e in enumerate(d.exponents) if np.count_nonzero(e) > 1]
    # first predicted sample is y3 = 0.5 y2 + 0.3 y1 y2: cross coefficient 0.3 recovered
    assert extract_predictor(m).rows[0, cross[0]] == pytest.approx(0.3, abs=1e-6)


def test_training_residual_non_increasing_in_rank(cross_lag_data):
    train, _ = cross_lag_data
    d = build_dictionary(3, 2)
    for fit, top in ((fit_causal_jump, d.size), (fit_hankel_dmd, d.per_lag(1).size)):
        res = [fit(train, 3, d, r).training_residual for r in range(1, top + 1)]
        assert all(b <= a + 1e-12 for a, b in zip(res, res[1:]))


def test_fit_is_deterministic(cross_lag_data):
    train, _ = cross_lag_data
    d = build_dictionary(2, 3)
    a = fit_causal_jump(train, 2, d, 7).operator
    b = fit_causal_jump(train, 2, d, 7).operator
    assert a.tobytes() == b.tobytes()


def test_causal_jump_needs_two_tau():
    with pytest.raises(InsufficientDataError):
        fit_causal_jump([np.ones(5)], 3, build_dictionary(3, 1), 1)


def test_scale_is_applied_and_undone(ar2_series):
    m = fit_causal_jump([5.0 * ar2_series], 2, build_dictionary(2, 1), 2, scale=5.0)
    f = rollout(m, 5.0 * ar2_series[:2], 30)
    np.testing.assert_allclose(f.predicted, 5.0 * ar2_series[2:32], rtol=1e-8, atol=1e-12)


def test_save_load_bit_exact(tmp_path, cross_lag_data):
    train, _ = cross_lag_data
    for m in (fit_causal_jump(train, 2, build_dictionary(2, 3), 6, scale=1.7),
              fit_hankel_dmd(train, 3, build_dictionary(3, 2), 5)):
        path = tmp_path / "m.json"
        save_model(m, path)
        back = load_model(path)
        assert back.operator.tobytes() == m.operator.tobytes()
        assert back.dictionary == m.dictionary
        assert (back.tau, back.variant, back.rank_used, back.scale) == (m.tau, m.variant, m.rank_used, m.scale)
        assert back.training_residual == m.training_residual


def test_load_truncated_file(tmp_path, ar2_series):
    path = tmp_path / "m.json"
    save_model(fit_causal_jump([ar2_series], 2, build_dictionary(2, 1), 2), path)
    text = path.read_text()
    path.write_text(text[: len(text) // 2])
    with pytest.raises(ModelFileError, match="line"):
        load_model(path)


def test_load_rejects_size_mismatch(tmp_path, ar2_series):
    import json

    path = tmp_path / "m.json"
    save_model(fit_causal_jump([ar2_series], 2, build_dictionary(2, 2), 3), path)
    doc = json.loads(path.read_text())
    doc["dictionary"]["exponents"].pop()
    path.write_text(json.dumps(doc))
    with pytest.raises(ModelFileError):
        load_model(path)


def test_load_rejects_version(tmp_path, ar2_series):
    import json

    path = tmp_path / "m.json"
    save_model(fit_causal_jump([ar2_series], 2, build_dictionary(2, 1), 2), path)
    doc = json.loads(path.read_text())
    doc["version"] = 99
    path.write_text(json.dumps(doc))
    with pytest.raises(ModelVersionError):
        load_model(path)


def test_multi_output_series():
    # two decoupled geometric outputs, p = 2
    y = np.stack([geometric(0.9, 40), geometric(0.7, 40, 2.0)], axis=1)
    m = fit_causal_jump([y], 1, build_dictionary(2, 1), 2)
    f = rollout(m, y[0], 10)
    assert f.predicted.shape == (10, 2)
    np.testing.assert_allclose(f.predicted, y[1:11], rtol=1e-8)


def test_simulated_series_matches_nar():
    y = simulate_nar(lambda w: 0.5 * w[-1], [1.0], 5)
    np.testing.assert_allclose(y, 0.5 ** np.arange(5))
