import numpy as np
import pytest

from cellbeam import neuralnet as nn
from cellbeam.errors import ContractViolation, UsageError


def _hand_forward(net, x):
    """Independent forward pass: explicit loops, no shared code path."""
    h = np.array(x, dtype=float)
    for i in range(len(net.weights)):
        z = np.empty(net.widths[i + 1])
        for j in range(net.widths[i + 1]):
            acc = net.biases[i][j]
            for k in range(net.widths[i]):
                acc += h[k] * net.weights[i][k, j]
            z[j] = acc
        h = np.tanh(z) if i < len(net.weights) - 1 else z
    if net.bounded:
        h = net.output_low + (net.output_high - net.output_low) * (np.tanh(h) + 1.0) / 2.0
    return h


def test_zero_network_outputs_zero():
    net = nn.Mlp([3, 4, 2], rng=0)
    for w in net.weights:
        w[:] = 0.0
    for b in net.biases:
        b[:] = 0.0
    assert np.array_equal(net.forward(np.ones(3)), np.zeros(2))


def test_identityish_single_unit():
    net = nn.Mlp([1, 1, 1], rng=0)
    net.weights[0][:] = 1.0
    net.weights[1][:] = 1.0
    for b in net.biases:
        b[:] = 0.0
    assert net.forward(np.zeros(1))[0] == 0.0  # tanh(0) = 0 through the chain


def test_forward_matches_hand_rolled_oracle():
    rng = np.random.default_rng(0)
    for trial in range(10):
        widths = [int(rng.integers(1, 5)) for _ in range(int(rng.integers(2, 5)))]
        bounded = bool(rng.integers(2))
        kwargs = {}
        if bounded:
            kwargs = dict(output_low=-rng.random(widths[-1]) - 0.5,
                          output_high=rng.random(widths[-1]) + 0.5)
        net = nn.Mlp(widths, rng=int(rng.integers(2 ** 31)), **kwargs)
        x = rng.standard_normal(widths[0])
        assert np.allclose(net.forward(x), _hand_forward(net, x), atol=1e-12)


def test_forward_rejects_wrong_width():
    net = nn.Mlp([3, 2], rng=0)
    with pytest.raises(ContractViolation):
        net.forward(np.ones(4))


def test_forward_is_pure():
    net = nn.Mlp([2, 3, 1], rng=1)
    before = [w.copy() for w in net.weights]
    x = np.array([0.3, -0.7])
    y1 = net.forward(x)
    y2 = net.forward(x)
    assert np.array_equal(y1, y2)
    assert all(np.array_equal(a, b) for a, b in zip(before, net.weights))


def _finite_diff_param_grads(net, x, upstream, h=1e-5):
    grads_w, grads_b = [], []
    for w in net.weights:
        g = np.zeros_like(w)
        for idx in np.ndindex(w.shape):
            orig = w[idx]
            w[idx] = orig + h
            plus = float(np.sum(net.forward(x) * upstream))
            w[idx] = orig - h
            minus = float(np.sum(net.forward(x) * upstream))
            w[idx] = orig
            g[idx] = (plus - minus) / (2 * h)
        grads_w.append(g)
    for b in net.biases:
        g = np.zeros_like(b)
        for idx in np.ndindex(b.shape):
            orig = b[idx]
            b[idx] = orig + h
            plus = float(np.sum(net.forward(x) * upstream))
            b[idx] = orig - h
            minus = float(np.sum(net.forward(x) * upstream))
            b[idx] = orig
            g[idx] = (plus - minus) / (2 * h)
        grads_b.append(g)
    return grads_w, grads_b


def _rel_err(a, b):
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-3)
    return np.max(np.abs(a - b) / scale)


def test_backward_matches_finite_differences():
    rng = np.random.default_rng(2)
    for trial in range(5):
        widths = [3, 4, 4, 2]
        net = nn.Mlp(widths, rng=int(rng.integers(2 ** 31)))
        x = rng.standard_normal(3)
        upstream = rng.standard_normal(2)
        net.forward(x)
        got = net.backward(upstream)
        want_w, want_b = _finite_diff_param_grads(net, x, upstream)
        for g, w in zip(got.weights, want_w):
            assert _rel_err(g, w) < 1e-4
        for g, b in zip(got.biases, want_b):
            assert _rel_err(g, b) < 1e-4


def test_backward_input_gradient_finite_diff():
    rng = np.random.default_rng(3)
    net = nn.Mlp([3, 5, 2], rng=4)
    x = rng.standard_normal(3)
    upstream = rng.standard_normal(2)
    net.forward(x)
    got = net.backward(upstream).wrt_input[0]
    h = 1e-5
    want = np.zeros(3)
    for i in range(3):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        want[i] = float(np.sum((net.forward(xp) - net.forward(xm)) * upstream)) / (2 * h)
    assert _rel_err(got, want) < 1e-4


def test_backward_zero_upstream_gives_zero_grads():
    net = nn.Mlp([2, 3, 2], rng=5)
    net.forward(np.ones(2))
    grads = net.backward(np.zeros(2))
    assert all(np.all(g == 0) for g in grads.weights + grads.biases)
    assert np.all(grads.wrt_input == 0)


def test_linear_layer_gradient_identity():
    # single linear layer: dL/dW = x (outer) upstream
    net = nn.Mlp([3, 2], rng=6)
    x = np.array([1.0, -2.0, 0.5])
    upstream = np.array([0.3, 0.7])
    net.forward(x)
    grads = net.backward(upstream)
    assert np.allclose(grads.weights[0], np.outer(x, upstream), atol=1e-14)
    assert np.allclose(grads.biases[0], upstream, atol=1e-14)


def test_backward_without_forward_is_usage_error():
    net = nn.Mlp([2, 2], rng=7)
    with pytest.raises(UsageError):
        net.backward(np.ones(2))


def test_bounded_output_stays_in_bounds():
    low = np.array([0.0, -1.0])
    high = np.array([40.0, 3.0])
    net = nn.Mlp([4, 6, 2], output_low=low, output_high=high, rng=8)
    rng = np.random.default_rng(9)
    for _ in range(20):
        y = net.forward(rng.standard_normal(4) * 10)
        assert np.all(y >= low) and np.all(y <= high)


def test_sgd_update():
    net = nn.Mlp([1, 1], rng=10)
    net.weights[0][:] = 1.0
    net.biases[0][:] = 0.0
    net.forward(np.ones(1))
    grads = net.backward(np.ones(1))
    grads.weights[0][:] = 2.0
    grads.biases[0][:] = 0.0
    nn.sgd_update(net, grads, lr=0.1)
    assert net.weights[0][0, 0] == pytest.approx(0.8)
    nn.sgd_update(net, grads, lr=0.0)
    assert net.weights[0][0, 0] == pytest.approx(0.8)


def test_adam_zero_gradient_is_noop():
    net = nn.Mlp([2, 2], rng=11)
    before = [p.copy() for p in net.weights + net.biases]
    opt = nn.AdamOptimizer(net, lr=0.1)
    net.forward(np.ones(2))
    grads = net.backward(np.zeros(2))
    opt.step(grads)
    after = net.weights + net.biases
    assert all(np.array_equal(a, b) for a, b in zip(before, after))
    assert all(np.all(m == 0) for m in opt._m) and all(np.all(v == 0) for v in opt._v)


def test_soft_update_endpoints_and_table_value():
    rng = np.random.default_rng(12)
    target = nn.Mlp([3, 3, 2], rng=13)
    source = nn.Mlp([3, 3, 2], rng=14)
    # tau = 1: exact copy
    t1 = target.copy()
    nn.soft_update(t1, source, 1.0)
    assert all(np.array_equal(a, b) for a, b in
               zip(t1.weights + t1.biases, source.weights + source.biases))
    # tau = 0: unchanged
    t0 = target.copy()
    nn.soft_update(t0, source, 0.0)
    assert all(np.array_equal(a, b) for a, b in
               zip(t0.weights + t0.biases, target.weights + target.biases))
    # tau = 0.1 with target 0 and source 10 lands on 1.0
    tz = nn.Mlp([1, 1], rng=15)
    sz = nn.Mlp([1, 1], rng=16)
    tz.weights[0][:] = 0.0
    sz.weights[0][:] = 10.0
    nn.soft_update(tz, sz, 0.1)
    assert tz.weights[0][0, 0] == pytest.approx(1.0)
    del rng


def test_soft_update_is_convex_combination():
    rng = np.random.default_rng(17)
    target = nn.Mlp([4, 5, 3], rng=18)
    source = nn.Mlp([4, 5, 3], rng=19)
    old = [p.copy() for p in target.weights + target.biases]
    nn.soft_update(target, source, rng.random())
    for t, o, s in zip(target.weights + target.biases, old,
                       source.weights + source.biases):
        lo = np.minimum(o, s) - 1e-12
        hi = np.maximum(o, s) + 1e-12
        assert np.all(t >= lo) and np.all(t <= hi)


def test_soft_update_validates_tau():
    a, b = nn.Mlp([2, 2], rng=20), nn.Mlp([2, 2], rng=21)
    with pytest.raises(ContractViolation):
        nn.soft_update(a, b, 1.5)
    with pytest.raises(ContractViolation):
        nn.soft_update(a, b, -0.1)


def test_save_load_roundtrip(tmp_path):
    net = nn.Mlp([4, 6, 3], output_low=np.zeros(3), output_high=np.ones(3) * 2, rng=22)
    path = tmp_path / "net.npz"
    net.save(path)
    loaded = nn.Mlp.load(path)
    x = np.random.default_rng(23).standard_normal(4)
    assert np.array_equal(net.forward(x), loaded.forward(x))
