"""Classifier tests: forward, exact gradients, training, checkpoints."""

import numpy as np
import pytest

from stylesym.errors import CheckpointError, DataError
from stylesym.mlp import (
    MlpModel,
    TrainConfig,
    forward_logit,
    init_mlp,
    input_gradient,
    load_checkpoint,
    save_checkpoint,
    train_binary,
)


def small_model(seed=0, input_dim=12, hidden=(8, 6)):
    return init_mlp(input_dim, hidden=hidden, seed=seed)


# ---------------------------------------------------------------------------
# init / forward
# ---------------------------------------------------------------------------


def test_init_deterministic_per_seed():
    a = init_mlp(10, hidden=(5,), seed=3)
    b = init_mlp(10, hidden=(5,), seed=3)
    for wa, wb in zip(a.weights, b.weights):
        assert np.array_equal(wa, wb)
    c = init_mlp(10, hidden=(5,), seed=4)
    assert not np.array_equal(a.weights[0], c.weights[0])


def test_init_default_architecture():
    m = init_mlp(1024)
    assert m.layer_dims == (1024, 384, 384, 384, 384, 1)
    assert len(m.weights) == 5  # 4 hidden + output
    assert all(np.array_equal(b, np.zeros_like(b)) for b in m.biases)


def test_zero_model_logit_is_zero():
    m = init_mlp(6, hidden=(4,), seed=0, zero=True)
    assert forward_logit(m, np.ones(6)) == 0.0


def test_linear_probe_reproduces_weighted_sum():
    m = init_mlp(3, hidden=(), seed=0)
    m.weights[0][:] = np.array([[1.0, -2.0, 0.5]])
    m.biases[0][:] = np.array([0.25])
    x = np.array([2.0, 1.0, 4.0])
    assert forward_logit(m, x) == pytest.approx(2 - 2 + 2 + 0.25, abs=1e-15)


def test_forward_finite_on_random_input():
    m = small_model()
    rng = np.random.default_rng(0)
    assert np.isfinite(forward_logit(m, rng.standard_normal(12)))


def test_forward_dimension_mismatch():
    with pytest.raises(DataError, match="input"):
        forward_logit(small_model(), np.ones(13))


# ---------------------------------------------------------------------------
# gradients
# ---------------------------------------------------------------------------


def test_gradient_of_linear_probe_is_weight_row():
    m = init_mlp(4, hidden=(), seed=0)
    g = input_gradient(m, np.zeros(4))
    assert np.array_equal(g, m.weights[0][0])


def test_gradient_zero_model():
    m = init_mlp(5, hidden=(3,), zero=True)
    assert np.array_equal(input_gradient(m, np.ones(5)), np.zeros(5))


def central_difference(m, x, step=1e-5):
    g = np.zeros_like(x)
    for i in range(x.size):
        up, down = x.copy(), x.copy()
        up[i] += step
        down[i] -= step
        g[i] = (forward_logit(m, up) - forward_logit(m, down)) / (2 * step)
    return g


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(99)
    for trial in range(10):
        dims = int(rng.integers(3, 16))
        hidden = tuple(int(rng.integers(2, 10)) for _ in range(int(rng.integers(0, 3))))
        m = init_mlp(dims, hidden=hidden, seed=trial)
        x = rng.standard_normal(dims)
        exact = input_gradient(m, x)
        approx = central_difference(m, x)
        rel = np.linalg.norm(exact - approx) / max(np.linalg.norm(exact), 1e-12)
        assert rel < 1e-4


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------


def blobs_dataset(seed=0, n=60):
    rng = np.random.default_rng(seed)
    pos = rng.normal(loc=(2.0, 2.0), scale=0.4, size=(n, 2))
    neg = rng.normal(loc=(-2.0, -2.0), scale=0.4, size=(n, 2))
    xs = np.vstack([pos, neg])
    ys = np.concatenate([np.ones(n), np.zeros(n)])
    return xs, ys


def test_training_separable_blobs():
    xs, ys = blobs_dataset()
    m = init_mlp(2, hidden=(16,), seed=1)
    cfg = TrainConfig(learning_rate=0.05, epochs=200, batch_size=16, seed=0)
    trained, history = train_binary(m, xs, ys, cfg)
    assert history.final_accuracy >= 0.95
    assert len(history.loss) == 200
    assert len(history.accuracy) == 200


def test_training_full_batch_convex_loss_monotone():
    # Single-layer probe: logistic regression, a convex problem; with
    # full-batch descent and a small step the recorded loss cannot rise.
    xs, ys = blobs_dataset(seed=5, n=40)
    m = init_mlp(2, hidden=(), seed=2)
    cfg = TrainConfig(
        learning_rate=0.05, epochs=50, batch_size=80, seed=0, weight_decay=0.0
    )
    _, history = train_binary(m, xs, ys, cfg)
    diffs = np.diff(history.loss)
    assert np.all(diffs <= 1e-12)


def test_training_bitwise_deterministic():
    xs, ys = blobs_dataset(seed=3)
    cfg = TrainConfig(learning_rate=0.01, epochs=5, batch_size=8, seed=42)
    m1, h1 = train_binary(init_mlp(2, hidden=(6,), seed=7), xs, ys, cfg)
    m2, h2 = train_binary(init_mlp(2, hidden=(6,), seed=7), xs, ys, cfg)
    assert h1.loss == h2.loss
    assert h1.accuracy == h2.accuracy
    for w1, w2 in zip(m1.weights, m2.weights):
        assert np.array_equal(w1, w2)


def test_training_rejects_single_class():
    xs = np.ones((4, 2))
    with pytest.raises(DataError, match="single class"):
        train_binary(small_model(input_dim=2, hidden=()), xs, np.ones(4), TrainConfig())


def test_training_rejects_bad_labels():
    xs = np.ones((4, 2))
    with pytest.raises(DataError, match="labels"):
        train_binary(
            small_model(input_dim=2, hidden=()), xs, np.array([0, 1, 2, 1]), TrainConfig()
        )


def test_train_config_validation():
    with pytest.raises(DataError):
        TrainConfig(learning_rate=0.0)
    with pytest.raises(DataError):
        TrainConfig(epochs=0)


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------


def test_checkpoint_round_trip(tmp_path):
    m = small_model(seed=11)
    p = tmp_path / "model.mlp"
    save_checkpoint(m, p)
    back = load_checkpoint(p)
    assert back.layer_dims == m.layer_dims
    for w1, w2 in zip(m.weights, back.weights):
        assert np.array_equal(w1, w2)
    for b1, b2 in zip(m.biases, back.biases):
        assert np.array_equal(b1, b2)


def test_checkpoint_bytes_deterministic(tmp_path):
    m = small_model(seed=4)
    p1, p2 = tmp_path / "a.mlp", tmp_path / "b.mlp"
    save_checkpoint(m, p1)
    save_checkpoint(m, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_checkpoint_bad_magic(tmp_path):
    p = tmp_path / "bad.mlp"
    p.write_bytes(b"NOTMAGIC" + b"\x00" * 32)
    with pytest.raises(CheckpointError, match="magic"):
        load_checkpoint(p)


def test_checkpoint_truncation(tmp_path):
    m = small_model()
    p = tmp_path / "model.mlp"
    save_checkpoint(m, p)
    data = p.read_bytes()
    p.write_bytes(data[: len(data) - 16])
    with pytest.raises(CheckpointError, match="truncated"):
        load_checkpoint(p)


def test_checkpoint_missing(tmp_path):
    with pytest.raises(CheckpointError, match="not found"):
        load_checkpoint(tmp_path / "ghost.mlp")


def test_model_shape_validation():
    with pytest.raises(DataError):
        MlpModel(weights=[np.ones((2, 3)), np.ones((1, 5))], biases=[np.zeros(2), np.zeros(1)])
