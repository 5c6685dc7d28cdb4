import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import blobs, instance
from oracles import central_differences
from lexaspect.classifier import (
    SoftmaxModel,
    TrainConfig,
    loss_and_gradient,
    predict,
    predict_many,
    predict_proba,
    train,
)
from lexaspect.corpus import AspectLabel
from lexaspect.errors import DimensionMismatch, EmptyData, SingleClassData, UnknownClassLabel

S, T, A = AspectLabel.STATE, AspectLabel.TELIC, AspectLabel.ATELIC
THREE = (S, T, A)


def random_problem(seed, n=50, dim=10):
    rng = np.random.default_rng(seed)
    data = [instance(f"i{i}", rng.normal(size=dim), THREE[rng.integers(3)]) for i in range(n)]
    model = SoftmaxModel(rng.normal(scale=0.5, size=(3, dim)), rng.normal(scale=0.5, size=3), THREE)
    return model, data


def max_relative_error(analytic, numeric):
    a, n = np.asarray(analytic).ravel(), np.asarray(numeric).ravel()
    return float(np.max(np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-8)))


def gradient_check(seed, l2):
    model, data = random_problem(seed)
    _, gW, gb = loss_and_gradient(model, data, l2)
    X = [inst.vector.tolist() for inst in data]
    y = [THREE.index(inst.label) for inst in data]
    nW, nb = central_differences(model.weights.tolist(), model.bias.tolist(), X, y, l2)
    return max(max_relative_error(gW, nW), max_relative_error(gb, nb))


@pytest.mark.parametrize("l2", [0.0, 1e-4, 1e-1])
@pytest.mark.parametrize("seed", range(3))
def test_gradient_matches_finite_differences(seed, l2):
    assert gradient_check(seed, l2) < 1e-5


def test_zero_model_loss_is_log_c():
    _, data = random_problem(0)
    loss, _, _ = loss_and_gradient(SoftmaxModel.zeros(THREE, 10), data, 0.0)
    assert loss == pytest.approx(math.log(3), abs=1e-12)


def test_confident_model_loss_vanishes():
    data = [instance("x", [1.0], S)]
    model = SoftmaxModel(np.array([[50.0], [-50.0]]), np.zeros(2), (S, A))
    loss, _, _ = loss_and_gradient(model, data, 0.0)
    assert loss < 1e-40


def test_loss_rejects_bad_inputs():
    model = SoftmaxModel.zeros((S, A), 2)
    with pytest.raises(DimensionMismatch):
        loss_and_gradient(model, [instance("x", [1.0, 2.0, 3.0], S)], 0.0)
    with pytest.raises(UnknownClassLabel):
        loss_and_gradient(model, [instance("x", [1.0, 2.0], T)], 0.0)
    with pytest.raises(EmptyData):
        loss_and_gradient(model, [], 0.0)


def test_separable_blobs_fit_perfectly():
    data = blobs(40)
    model, trace = train(data, (S, A))
    assert [predict(model, d.vector) for d in data] == [d.label for d in data]
    assert trace.iterations_run > 0


def test_heavy_regularization_shrinks_weights():
    data = blobs(40)
    model, _ = train(data, (S, A), TrainConfig(l2_lambda=1e6))
    assert np.abs(model.weights).max() < 1e-6
    probs = predict_proba(model, data[0].vector)
    assert probs == pytest.approx([0.5, 0.5], abs=1e-6)


def test_zero_iterations_gives_zero_model():
    data = blobs(10)
    model, trace = train(data, (S, A), TrainConfig(max_iters=0))
    assert not model.weights.any() and not model.bias.any()
    assert trace.iterations_run == 0
    assert predict_proba(model, data[0].vector).tolist() == [0.5, 0.5]


def test_train_empty():
    with pytest.raises(EmptyData):
        train([])


def test_single_class_warns_and_predicts_it():
    data = [instance(f"x{i}", [float(i), 1.0], A) for i in range(4)]
    with pytest.warns(SingleClassData):
        model, trace = train(data, (S, A))
    assert predict_proba(model, np.array([9.0, -3.0])).tolist() == [0.0, 1.0]
    assert trace.converged and trace.degenerate


def test_trace_invariants():
    model, trace = train(blobs(30, sigma=0.5), (S, A), TrainConfig(max_iters=50))
    assert trace.converged == (trace.final_grad_norm <= 1e-6)
    assert all(b <= a for a, b in zip(trace.losses, trace.losses[1:]))
    assert trace.final_loss == trace.losses[-1]


def test_converges_with_strong_regularization():
    _, trace = train(blobs(30, sigma=0.5), (S, A), TrainConfig(l2_lambda=0.1))
    assert trace.converged


def test_training_is_bitwise_deterministic_and_order_free():
    data = blobs(30, sigma=0.6, seed=4)
    m1, _ = train(data, (S, A), TrainConfig(max_iters=200))
    m2, _ = train(list(reversed(data)), (S, A), TrainConfig(max_iters=200))
    rng = np.random.default_rng(1)
    shuffled = [data[i] for i in rng.permutation(len(data))]
    m3, _ = train(shuffled, (S, A), TrainConfig(max_iters=200))
    for m in (m2, m3):
        assert np.array_equal(m1.weights, m.weights)
        assert np.array_equal(m1.bias, m.bias)


def test_predict_proba_zero_model_uniform():
    model = SoftmaxModel.zeros(THREE, 4)
    assert predict_proba(model, np.ones(4)).tolist() == pytest.approx([1 / 3] * 3, abs=1e-15)


def test_predict_proba_shift_invariance():
    model, _ = random_problem(5)
    x = np.linspace(-1, 1, 10)
    shifted = SoftmaxModel(model.weights, model.bias + 123.0, model.classes)
    assert np.allclose(predict_proba(model, x), predict_proba(shifted, x), atol=1e-12, rtol=0)


def test_predict_proba_extreme_logits():
    model = SoftmaxModel(np.zeros((2, 1)), np.array([1000.0, -1000.0]), (S, A))
    p = predict_proba(model, np.zeros(1))
    assert np.all(np.isfinite(p))
    assert p[0] == pytest.approx(1.0) and p[1] == pytest.approx(0.0)


def test_predict_tie_goes_to_first_class():
    assert predict(SoftmaxModel.zeros(THREE, 2), np.zeros(2)) is S


def test_predict_argmax():
    bias = np.log(np.array([0.1, 0.8, 0.1]))
    model = SoftmaxModel(np.zeros((3, 1)), bias, THREE)
    assert predict(model, np.zeros(1)) is T


def test_predict_dimension_check():
    with pytest.raises(DimensionMismatch):
        predict(SoftmaxModel.zeros(THREE, 2), np.zeros(3))


def test_predict_many_matches_predict():
    model, data = random_problem(2)
    assert predict_many(model, data) == [predict(model, d.vector) for d in data]


def test_model_json_round_trip():
    model, _ = random_problem(3)
    cfg = TrainConfig(l2_lambda=0.5)
    obj = json.loads(json.dumps(model.to_json(cfg)))
    again = SoftmaxModel.from_json(obj)
    assert obj["train_config"]["l2_lambda"] == 0.5
    assert np.array_equal(again.weights, model.weights)
    assert np.array_equal(again.bias, model.bias)
    assert again.classes == model.classes


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(l2_lambda=-1)
    with pytest.raises(ValueError):
        TrainConfig(grad_tol=0)
    with pytest.raises(ValueError):
        TrainConfig(seed=2**64)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32), st.floats(-50, 50))
def test_predict_invariant_to_bias_shift(seed, shift):
    model, data = random_problem(seed, n=5)
    shifted = SoftmaxModel(model.weights, model.bias + shift, model.classes)
    assert predict_many(model, data) == predict_many(shifted, data)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([0.0, 1e-4, 1e-1]))
def test_gradient_property(seed, l2):
    assert gradient_check(seed, l2) < 1e-5
