import numpy as np
import pytest

from vsl.absorption.dataset import ArrayDataset
from vsl.absorption.model import (CorruptModelError, DivergenceError, EmptyDatasetError, ShapeMismatchError)
from vsl.absorption.nn import (Adam, AdamState, Conv1d, Dense, Elu, Flatten, LayerSpec, MaxPool1d, Model, ModelSpec,
                               Network, OutputHead, Relu, Sigmoid, TrainConfig, Trainer, adam_step, dumps_model,
                               evaluate_loss, load_model, loads_model, mse_loss, predict, raw_to_alpha, save_model,
                               targets_for_head, train)

H = 1e-4


def tiny_cnn(head=OutputHead.ALPHA) -> ModelSpec:
    return ModelSpec([LayerSpec.conv1d(2, 5), LayerSpec.maxpool(4), LayerSpec.elu(), LayerSpec.dense(3),
                      LayerSpec.elu()], head, input_dim=32, name="tiny_cnn")


def tiny_mlp(head=OutputHead.ALPHA) -> ModelSpec:
    return ModelSpec([LayerSpec.dense(8), LayerSpec.elu()], head, input_dim=32, name="tiny_mlp")


def numeric_grad(f, x: np.ndarray) -> np.ndarray:
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        old = x[idx]
        x[idx] = old + H
        up = f()
        x[idx] = old - H
        down = f()
        x[idx] = old
        g[idx] = (up - down) / (2 * H)
    return g


def assert_close_grad(analytic, numeric):
    scale = max(1.0, np.max(np.abs(numeric)))
    assert np.max(np.abs(analytic - numeric)) / scale < 1e-6


def check_layer(layer, x, rng):
    y = layer.forward(x)
    r = rng.standard_normal(y.shape)
    layer.zero_grad()
    dx = layer.backward(r)

    def objective():
        return float(np.sum(layer.forward(x) * r))

    assert_close_grad(dx, numeric_grad(objective, x))
    for name, p in layer.params.items():
        analytic = layer.grads[name].copy()
        assert_close_grad(analytic, numeric_grad(objective, p))


@pytest.mark.parametrize("make,shape", [
    (lambda rng: Dense(12, 5, rng, np.float64), (4, 12)),
    (lambda rng: Dense(12, 5, rng, np.float64), (4, 3, 4)),
    (lambda rng: Conv1d(1, 3, 5, rng, np.float64), (2, 16)),
    (lambda rng: Conv1d(2, 3, 3, rng, np.float64), (2, 2, 16)),
    (lambda rng: MaxPool1d(4), (2, 3, 16)),
    (lambda rng: MaxPool1d(2), (3, 10)),
    (lambda rng: Elu(), (3, 7)),
    (lambda rng: Sigmoid(), (3, 7)),
    (lambda rng: Relu(), (3, 7)),
    (lambda rng: Flatten(), (2, 3, 4)),
])
def test_layer_gradients(make, shape):
    rng = np.random.default_rng(0)
    check_layer(make(rng), rng.standard_normal(shape), rng)


@pytest.mark.parametrize("spec", [tiny_cnn(), tiny_mlp(), tiny_mlp(OutputHead.INVERSE_ALPHA),
                                  tiny_cnn(OutputHead.ALPHA_AND_SCATTERING)])
def test_network_gradients(spec):
    rng = np.random.default_rng(1)
    model = Model(spec, Network(spec, rng, np.float64))
    x = rng.standard_normal((3, 32))
    labels = rng.uniform(0.05, 0.95, (3, 12))
    model.network.zero_grad()
    model.backward(x, labels)
    grads = {k: v.copy() for k, v in model.network.grads.items()}
    for name, p in model.network.params.items():
        assert_close_grad(grads[name], numeric_grad(lambda: model.loss(x, labels), p))


def test_cnn_preset_shapes():
    trace = ModelSpec.cnn().shape_trace()
    assert trace[0] == (8000,)
    assert (2000,) in trace
    assert trace[-1] == (6,)
    assert ModelSpec.mlp(OutputHead.ALPHA_AND_SCATTERING).shape_trace()[-1] == (12,)


def test_indivisible_pool_rejected():
    with pytest.raises(ShapeMismatchError):
        ModelSpec([LayerSpec.maxpool(3)], input_dim=32)
    with pytest.raises(ShapeMismatchError):
        LayerSpec.conv1d(4, 4)
    with pytest.raises(ShapeMismatchError):
        ModelSpec.preset("transformer")


def test_spec_round_trip():
    spec = ModelSpec.cnn(OutputHead.INVERSE_ALPHA)
    assert ModelSpec.from_dict(spec.to_dict()) == spec


def test_zero_weights_give_half():
    net = Network(tiny_mlp(), rng=None)
    out = net.forward(np.random.default_rng(0).standard_normal((2, 32)))
    assert np.all(out == 0.5)


def test_inverse_head_clamps():
    model = Model(tiny_mlp(OutputHead.INVERSE_ALPHA), Network(tiny_mlp(OutputHead.INVERSE_ALPHA), rng=None))
    label = predict(model, np.zeros(32))
    assert np.all(label.alpha_bar == 1.0)
    assert np.allclose(raw_to_alpha(np.array([[0.5, 2.0, 4.0, 10.0, 1000.0, 1.0]]), OutputHead.INVERSE_ALPHA),
                       [[1.0, 0.5, 0.25, 0.1, 0.001, 1.0]])


def test_one_hot_convolution_is_identity():
    conv = Conv1d(1, 1, 5, rng=None, dtype=np.float64)
    conv.params["weight"][0, 0, 2] = 1.0
    x = np.random.default_rng(0).standard_normal((2, 20))
    assert np.array_equal(conv.forward(x)[:, 0, :], x)


def test_shape_mismatch_on_wrong_input():
    with pytest.raises(ShapeMismatchError):
        Network(tiny_mlp()).forward(np.zeros((2, 31)))


def test_zero_gradient_at_minimum():
    spec = tiny_cnn()
    model = Model(spec, Network(spec, np.random.default_rng(0), np.float64))
    x = np.random.default_rng(1).standard_normal((4, 32))
    labels = model.forward(x)
    model.network.zero_grad()
    assert model.backward(x, labels) == 0.0
    assert all(not np.any(g) for g in model.network.grads.values())


def test_mse_loss():
    loss, grad = mse_loss(np.array([[1.0, 2.0]]), np.array([[0.0, 0.0]]))
    assert loss == pytest.approx(2.5)
    assert np.allclose(grad, [[1.0, 2.0]])
    loss, grad = mse_loss(np.array([[1.0, 2.0]]), np.array([[0.0, 0.0]]), reduction="sum")
    assert loss == pytest.approx(5.0)
    with pytest.raises(ShapeMismatchError):
        mse_loss(np.zeros((1, 2)), np.zeros((1, 3)))


def test_inverse_targets_floor():
    labels = np.array([[0.0, 0.5, 1.0, 0.25, 0.1, 0.001] + [0.0] * 6])
    assert np.allclose(targets_for_head(labels, OutputHead.INVERSE_ALPHA), [[1000.0, 2.0, 1.0, 4.0, 10.0, 1000.0]])
    with pytest.raises(ShapeMismatchError):
        targets_for_head(labels[:, :6], OutputHead.ALPHA_AND_SCATTERING)


def test_adam_first_step_is_signed_lr():
    params = {"w": np.array([1.0, -2.0, 3.0])}
    grads = {"w": np.array([0.5, -4.0, 1e-3])}
    adam_step(params, grads, AdamState(params), 1, lr=0.01)
    assert np.allclose(params["w"], [0.99, -1.99, 2.99], atol=1e-6)


def test_adam_zero_gradient_keeps_weights():
    params = {"w": np.array([1.0, 2.0])}
    opt = Adam(params, lr=0.1)
    for _ in range(10):
        opt.step({"w": np.zeros(2)})
    assert np.array_equal(params["w"], [1.0, 2.0])
    with pytest.raises(ValueError):
        adam_step(params, {"w": np.zeros(2)}, AdamState(params), 0)


def test_adam_minimizes_square():
    params = {"w": np.array([1.0])}
    opt = Adam(params, lr=0.1)
    for _ in range(100):
        opt.step({"w": 2.0 * params["w"]})
    assert abs(params["w"][0]) < 0.05


def constant_sets(n_train=64, n_dev=32, value=0.3, seed=0):
    rng = np.random.default_rng(seed)
    labels = np.full((n_train + n_dev, 12), value)
    inputs = rng.standard_normal((n_train + n_dev, 32))
    return (ArrayDataset(inputs[:n_train], labels[:n_train]),
            ArrayDataset(inputs[n_train:], labels[n_train:]))


def test_constant_target_is_learned():
    train_set, dev_set = constant_sets()
    config = TrainConfig(batch_size=16, learning_rate=0.01, epochs=300, seed=0)
    model = train(tiny_mlp(), train_set, dev_set, config)
    assert evaluate_loss(model, dev_set) < 1e-4
    assert model.provenance["dev_loss"] < 1e-4
    assert model.provenance["dev_fingerprint"] == dev_set.fingerprint()


def test_training_is_deterministic():
    train_set, dev_set = constant_sets(seed=3)
    config = TrainConfig(batch_size=10, learning_rate=0.01, epochs=5, seed=7)
    a = train(tiny_cnn(), train_set, dev_set, config)
    b = train(tiny_cnn(), train_set, dev_set, config)
    assert dumps_model(a) == dumps_model(b)


def test_training_curve_and_events():
    train_set, dev_set = constant_sets()
    trainer = Trainer(tiny_mlp(), TrainConfig(batch_size=32, epochs=4))
    seen = []
    trainer.on_epoch += seen.append
    model = trainer.train(train_set, dev_set)
    df = trainer.curve.to_df()
    assert list(df.columns) == ["epoch", "train_loss", "train_loss_ma", "dev_loss", "best"]
    assert [r.epoch for r in seen] == [0, 1, 2, 3]
    assert df["dev_loss"].min() == pytest.approx(model.provenance["dev_loss"])
    assert df["best"].iloc[model.provenance["best_epoch"]]


def test_divergence_is_reported():
    train_set, dev_set = constant_sets()
    broken = ArrayDataset(np.full_like(train_set.inputs, np.nan), train_set.labels)
    with pytest.raises(DivergenceError):
        train(tiny_mlp(), broken, dev_set, TrainConfig(epochs=1))


def test_empty_set_rejected():
    train_set, dev_set = constant_sets()
    empty = ArrayDataset(np.zeros((0, 32)), np.zeros((0, 12)))
    with pytest.raises(EmptyDatasetError):
        train(tiny_mlp(), empty, dev_set, TrainConfig(epochs=1))
    with pytest.raises(ShapeMismatchError):
        train(ModelSpec.mlp(), train_set, dev_set, TrainConfig(epochs=1))


def test_model_file_round_trip(tmp_path):
    spec = tiny_cnn(OutputHead.ALPHA_AND_SCATTERING)
    model = Model(spec, seed=5, provenance={"best_epoch": 3, "dev_loss": 0.01})
    path = tmp_path / "m.absk"
    save_model(model, path)
    loaded = load_model(path, input_dim=32)
    assert loaded.spec == spec
    assert loaded.provenance == {"best_epoch": 3, "dev_loss": 0.01}
    x = np.random.default_rng(0).standard_normal((3, 32))
    assert np.array_equal(loaded.forward(x), model.forward(x))


def test_truncated_model_file():
    data = dumps_model(Model(tiny_mlp(), seed=1))
    with pytest.raises(CorruptModelError) as e:
        loads_model(data[:-10])
    assert e.value.offset is not None
    with pytest.raises(CorruptModelError):
        loads_model(b"XXXX" + data[4:])


def test_model_input_dim_checked():
    data = dumps_model(Model(tiny_mlp(), seed=1))
    with pytest.raises(ShapeMismatchError):
        loads_model(data, input_dim=8000)


def test_predict_range():
    model = Model(tiny_cnn(OutputHead.ALPHA_AND_SCATTERING), seed=2)
    labels = predict(model, np.random.default_rng(0).standard_normal((5, 32)))
    assert len(labels) == 5
    for label in labels:
        assert np.all((label.alpha_bar >= 0) & (label.alpha_bar <= 1))
        assert label.s_bar is not None
