"""Network forward/backward against independent recomputation and finite
differences, plus the update rule and the checkpoint format."""

import numpy as np
import pytest

from dcl.errors import DataError
from dcl.model import CHECKPOINT_MAGIC, DenseNet


def small_net(seed=0):
    return DenseNet(feature_dim=5, num_attributes=2, trunk_widths=(7,),
                    embedding_dim=3, num_classes=2, seed=seed)


def reference_forward(net, x):
    """Per-attribute recomputation with plain matmuls."""
    act = x
    for w, b in zip(net.trunk_w, net.trunk_b):
        act = np.maximum(act @ w + b, 0.0)
    n = x.shape[0]
    emb = np.empty((n, net.num_attributes, net.embedding_dim))
    logits = np.empty((n, net.num_attributes, net.num_classes))
    for a in range(net.num_attributes):
        emb[:, a] = act @ net.embed_w[:, a, :] + net.embed_b[a]
        logits[:, a] = emb[:, a] @ net.head_w[a] + net.head_b[a]
    return emb, logits


def test_forward_matches_reference():
    rng = np.random.default_rng(0)
    net = DenseNet(feature_dim=6, num_attributes=3, trunk_widths=(9, 5),
                   embedding_dim=4, num_classes=2, seed=1)
    x = rng.normal(size=(8, 6))
    emb, logits, cache = net.forward(x)
    ref_emb, ref_logits = reference_forward(net, x)
    assert np.allclose(emb, ref_emb, rtol=1e-13, atol=1e-14)
    assert np.allclose(logits, ref_logits, rtol=1e-13, atol=1e-14)
    assert emb.shape == (8, 3, 4)
    assert logits.shape == (8, 3, 2)
    assert cache.version == net.version


def test_initialization_bounds_and_zero_biases():
    net = DenseNet(feature_dim=8, num_attributes=4, trunk_widths=(16,),
                   embedding_dim=6, num_classes=2, seed=3)
    checks = [
        (net.trunk_w[0], 8, 16),
        (net.embed_w, 16, 6),
        (net.head_w, 6, 2),
    ]
    for weights, fan_in, fan_out in checks:
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        assert np.all(np.abs(weights) <= bound)
        assert np.abs(weights).max() > 0.5 * bound  # actually spread out
    for bias in [net.trunk_b[0], net.embed_b, net.head_b]:
        assert np.all(bias == 0.0)


def test_initialization_is_seeded():
    a, b, c = small_net(seed=5), small_net(seed=5), small_net(seed=6)
    for (name_a, pa), (_, pb), (_, pc) in zip(a.parameters(), b.parameters(), c.parameters()):
        assert np.array_equal(pa, pb), name_a
        if "_b" not in name_a:
            assert not np.array_equal(pa, pc), name_a


def test_backward_matches_finite_differences():
    rng = np.random.default_rng(42)
    net = small_net(seed=9)
    x = rng.normal(size=(4, 5))
    w_logit = rng.normal(size=(4, 2, 2))
    w_emb = rng.normal(size=(4, 2, 3))

    def functional():
        emb, logits, _ = net.forward(x)
        return float((w_logit * logits).sum() + (w_emb * emb).sum())

    _, _, cache = net.forward(x)
    net.backward(cache, w_logit, embedding_grads=w_emb)
    analytic = dict(zip([n for n, _ in net.parameters()], net._gradients()))

    h = 1e-5
    for name, param in net.parameters():
        fd = np.zeros_like(param)
        for idx in np.ndindex(param.shape):
            orig = param[idx]
            param[idx] = orig + h
            hi = functional()
            param[idx] = orig - h
            lo = functional()
            param[idx] = orig
            fd[idx] = (hi - lo) / (2.0 * h)
        assert np.allclose(analytic[name], fd, rtol=1e-5, atol=1e-7), name


def test_backward_without_embedding_grads():
    rng = np.random.default_rng(1)
    net = small_net()
    x = rng.normal(size=(3, 5))
    w_logit = rng.normal(size=(3, 2, 2))
    _, _, cache = net.forward(x)
    net.backward(cache, w_logit)
    explicit = small_net()
    _, _, cache2 = explicit.forward(x)
    explicit.backward(cache2, w_logit, embedding_grads=np.zeros((3, 2, 3)))
    for got, want in zip(net._gradients(), explicit._gradients()):
        assert np.allclose(got, want, atol=1e-15)


def test_backward_accumulates():
    rng = np.random.default_rng(2)
    net = small_net()
    x = rng.normal(size=(3, 5))
    upstream = rng.normal(size=(3, 2, 2))
    _, _, cache = net.forward(x)
    net.backward(cache, upstream)
    once = [g.copy() for g in net._gradients()]
    net.backward(cache, upstream)
    for g, o in zip(net._gradients(), once):
        assert np.array_equal(g, 2.0 * o)


def test_backward_rejects_stale_cache():
    rng = np.random.default_rng(3)
    net = small_net()
    x = rng.normal(size=(2, 5))
    upstream = np.zeros((2, 2, 2))
    _, _, cache = net.forward(x)
    net.backward(cache, upstream)
    net.sgd_update(0.1)
    with pytest.raises(ValueError, match="stale"):
        net.backward(cache, upstream)
    _, _, fresh = net.forward(x)
    net.backward(fresh, upstream)  # a fresh cache works again


def test_sgd_update_rule_and_bookkeeping():
    rng = np.random.default_rng(4)
    net = small_net()
    x = rng.normal(size=(3, 5))
    upstream = rng.normal(size=(3, 2, 2))
    _, _, cache = net.forward(x)
    net.backward(cache, upstream)
    before = [(name, p.copy()) for name, p in net.parameters()]
    grads = [g.copy() for g in net._gradients()]
    version = net.version

    lr, wd = 0.05, 0.01
    net.sgd_update(lr, wd)
    for (name, theta0), grad, (_, theta1) in zip(before, grads, net.parameters()):
        expected = theta0 - lr * (grad + wd * theta0)
        assert np.array_equal(theta1, expected), name
    for g in net._gradients():
        assert np.all(g == 0.0)
    assert net.version == version + 1

    with pytest.raises(ValueError):
        net.sgd_update(0.0)
    with pytest.raises(ValueError):
        net.sgd_update(0.1, weight_decay=-1.0)


def test_validation_errors():
    with pytest.raises(ValueError):
        DenseNet(feature_dim=0, num_attributes=1)
    with pytest.raises(ValueError):
        DenseNet(feature_dim=3, num_attributes=1, trunk_widths=())
    with pytest.raises(ValueError):
        DenseNet(feature_dim=3, num_attributes=1, num_classes=1)
    net = small_net()
    with pytest.raises(ValueError):
        net.forward(np.zeros((2, 4)))  # wrong feature width
    _, _, cache = net.forward(np.zeros((2, 5)))
    with pytest.raises(ValueError):
        net.backward(cache, np.zeros((2, 2, 3)))  # wrong logit grad shape


def test_checkpoint_round_trip(tmp_path):
    net = DenseNet(feature_dim=6, num_attributes=3, trunk_widths=(10, 4),
                   embedding_dim=5, num_classes=2, seed=13)
    path = tmp_path / "net.ckpt"
    net.save(path)
    loaded = DenseNet.load(path)
    assert loaded.feature_dim == net.feature_dim
    assert loaded.trunk_widths == net.trunk_widths
    for (name, p), (_, q) in zip(net.parameters(), loaded.parameters()):
        assert np.array_equal(p, q), name

    x = np.random.default_rng(0).normal(size=(4, 6))
    _, logits_a, _ = net.forward(x)
    _, logits_b, _ = loaded.forward(x)
    assert np.array_equal(logits_a, logits_b)

    resaved = tmp_path / "again.ckpt"
    loaded.save(resaved)
    assert path.read_bytes() == resaved.read_bytes()


def test_checkpoint_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.ckpt"
    path.write_bytes(b"NOTACKPT" + b"\x00" * 32)
    with pytest.raises(DataError, match="magic"):
        DenseNet.load(path)


def test_checkpoint_rejects_unknown_version(tmp_path):
    net = small_net()
    path = tmp_path / "net.ckpt"
    net.save(path)
    raw = path.read_bytes()
    patched = raw.replace(b'"format_version": 1', b'"format_version": 9')
    assert patched != raw
    bad = tmp_path / "patched.ckpt"
    bad.write_bytes(patched)
    with pytest.raises(DataError, match="version"):
        DenseNet.load(bad)


def test_checkpoint_rejects_trailing_bytes(tmp_path):
    net = small_net()
    path = tmp_path / "net.ckpt"
    net.save(path)
    padded = tmp_path / "padded.ckpt"
    padded.write_bytes(path.read_bytes() + b"\x00" * 8)
    with pytest.raises(DataError, match="trailing"):
        DenseNet.load(padded)


def test_checkpoint_rejects_corrupt_header(tmp_path):
    net = small_net()
    path = tmp_path / "net.ckpt"
    net.save(path)
    raw = bytearray(path.read_bytes())
    start = len(CHECKPOINT_MAGIC) + 4
    raw[start : start + 2] = b"\xff\xfe"
    bad = tmp_path / "corrupt.ckpt"
    bad.write_bytes(bytes(raw))
    with pytest.raises(DataError, match="header"):
        DenseNet.load(bad)
