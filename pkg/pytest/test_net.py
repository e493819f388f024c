"""Completion network tests"""
import numpy as np
import pytest
import ssclab as ssc
from ssclab import net
from ssclab.voxel import dilate_support
from ssclab.exception import ArgumentError


def conv3d_oracle(x, w):
    """Direct summation over output voxels and kernel taps"""
    k = w.shape[0]
    r = k // 2
    L, W, H, _ = x.shape
    out = np.zeros((L, W, H, w.shape[4]))
    for i, j, l in np.ndindex(L, W, H):
        for a, b, c in np.ndindex(k, k, k):
            p, q, s = i + a - r, j + b - r, l + c - r
            if 0 <= p < L and 0 <= q < W and 0 <= s < H:
                out[i, j, l] += x[p, q, s] @ w[a, b, c]
    return out


def completion_oracle(x, params):
    def mpb(v, p):
        return np.maximum(sum(conv3d_oracle(v, b.weights) for b in p.branches()), 0.0)
    upper = mpb(x, params.upper_mpb)
    mid = conv3d_oracle(x, params.mid_in.weights)
    mid = mpb(mid, params.mid_mpb1)
    mid = mpb(mid, params.mid_mpb2)
    mid = conv3d_oracle(mid, params.mid_out.weights)
    return upper + mid + x


def _identity_kernel(k, c):
    w = np.zeros((k, k, k, c, c))
    w[k // 2, k // 2, k // 2] = np.eye(c)
    return net.ConvKernel(w)


def _sparse_volume(rng, dims, c, density=0.3):
    return rng.normal(size=dims + (c,)) * (rng.random(dims + (1,)) < density)


def test_backends_registered():
    assert ssc.comp.registered('conv::') == ['conv::dense', 'conv::sparse']


@pytest.mark.parametrize('method', ['dense', 'sparse'])
@pytest.mark.parametrize('k', [3, 5, 7])
def test_conv3d_identity(method, k, rng):
    x = rng.normal(size=(4, 5, 3, 2))
    np.testing.assert_array_equal(net.conv3d(x, _identity_kernel(k, 2), method), x)


@pytest.mark.parametrize('method', ['dense', 'sparse'])
def test_conv3d_single_voxel(method, rng):
    x = np.zeros((6, 6, 6, 2))
    x[2, 3, 4] = (1.5, -0.5)
    w = rng.normal(size=(3, 3, 3, 2, 3))
    out = net.conv3d(x, w, method)
    support = np.argwhere(np.any(out != 0, axis=-1))
    assert np.all(np.abs(support - (2, 3, 4)) <= 1)
    for dx, dy, dz in np.ndindex(3, 3, 3):
        # output at (2,3,4) - offset + 1 reads the input through tap (dx,dy,dz)
        o = (2 - dx + 1, 3 - dy + 1, 4 - dz + 1)
        np.testing.assert_allclose(out[o], x[2, 3, 4] @ w[dx, dy, dz], rtol=1e-12)


@pytest.mark.parametrize('method', ['dense', 'sparse'])
def test_conv3d_zero_input(method, rng):
    out = net.conv3d(np.zeros((5, 5, 5, 3)), rng.normal(size=(5, 5, 5, 3, 2)), method)
    assert out.shape == (5, 5, 5, 2)
    assert np.all(out == 0.0)


@pytest.mark.parametrize('method', ['dense', 'sparse'])
@pytest.mark.parametrize('k', [3, 5, 7])
def test_conv3d_matches_oracle(method, k, rng):
    for _ in range(3):
        dims = tuple(int(v) for v in rng.integers(1, 7, size=3))
        x = _sparse_volume(rng, dims, 2)
        w = rng.normal(size=(k, k, k, 2, 3))
        expected = conv3d_oracle(x, w)
        np.testing.assert_allclose(net.conv3d(x, w, method), expected, rtol=1e-9, atol=1e-12)


def test_conv3d_linearity(rng):
    x, y = rng.normal(size=(2, 6, 5, 4, 2))
    w = rng.normal(size=(5, 5, 5, 2, 2))
    a, b = 0.7, -1.3
    lhs = net.conv3d(a * x + b * y, w)
    rhs = a * net.conv3d(x, w) + b * net.conv3d(y, w)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-12)


def test_conv3d_tile_count(rng):
    x = _sparse_volume(rng, (9, 6, 5), 3)
    w = rng.normal(size=(3, 3, 3, 3, 3))
    one = ssc.comp.create('conv::dense', {'tiles': 1}).conv3d(x, w)
    four = ssc.comp.create('conv::dense', {'tiles': 4}).conv3d(x, w)
    np.testing.assert_array_equal(one, four)


def test_conv3d_threads(rng):
    x = _sparse_volume(rng, (8, 6, 5), 2)
    w = rng.normal(size=(5, 5, 5, 2, 2))
    expected = net.conv3d(x, w)
    try:
        ssc.parallel.init('parallel::default', {'num_threads': 4})
        np.testing.assert_array_equal(net.conv3d(x, w), expected)
    finally:
        ssc.parallel.shutdown()


def test_conv3d_errors(rng):
    with pytest.raises(ArgumentError):
        net.conv3d(np.zeros((3, 3, 3, 2)), np.zeros((3, 3, 3, 1, 1)))
    with pytest.raises(ArgumentError):
        net.ConvKernel(np.zeros((4, 4, 4, 1, 1)))
    with pytest.raises(ArgumentError):
        net.ConvKernel(np.full((3, 3, 3, 1, 1), np.inf))


def test_mpb_zero_weights(rng):
    p = net.MPBParams(*(net.ConvKernel(np.zeros((k, k, k, 2, 2))) for k in (3, 5, 7)))
    assert np.all(net.mpb_forward(rng.normal(size=(4, 4, 4, 2)), p) == 0.0)


def test_mpb_identity_branches(rng):
    p = net.MPBParams(*(_identity_kernel(k, 2) for k in (3, 5, 7)))
    x = np.abs(rng.normal(size=(4, 4, 4, 2)))
    np.testing.assert_allclose(net.mpb_forward(x, p), 3.0 * x, rtol=1e-15)


def test_mpb_negative_preactivation(rng):
    p = net.MPBParams(*(_identity_kernel(k, 2) for k in (3, 5, 7)))
    x = -np.abs(rng.normal(size=(4, 4, 4, 2)))
    assert np.all(net.mpb_forward(x, p) == 0.0)


def test_mpb_branch_sizes():
    k3 = _identity_kernel(3, 1)
    with pytest.raises(ArgumentError):
        net.MPBParams(k3, k3, _identity_kernel(7, 1))


def test_completion_zero_weights(rng):
    x = rng.normal(size=(5, 4, 3, 2))
    np.testing.assert_array_equal(net.completion_forward(x, net.zero_completion_params(2)), x)


@pytest.mark.parametrize('method', ['dense', 'sparse'])
def test_completion_zero_input(method, seed):
    params = net.init_completion_params(3, seed)
    out = net.completion_forward(np.zeros((6, 6, 4, 3)), params, method)
    assert np.max(np.abs(out)) <= 1e-12


def test_receptive_radius():
    assert net.receptive_radius(net.init_completion_params(1)) == 8


@pytest.mark.parametrize('method', ['dense', 'sparse'])
def test_completion_support_single_voxel(method, seed):
    params = net.init_completion_params(2, seed)
    x = np.zeros((16, 16, 8, 2))
    x[8, 8, 4] = (1.0, 0.5)
    out = net.completion_forward(x, params, method)
    support = np.any(out != 0, axis=-1)
    r = net.receptive_radius(params)
    assert not np.any(support & ~dilate_support(np.any(x != 0, axis=-1), r))
    assert np.max(np.abs(np.argwhere(support) - (8, 8, 4))) <= r


def test_completion_matches_oracle(rng):
    params = net.init_completion_params(2, int(rng.integers(1 << 30)))
    x = _sparse_volume(rng, (5, 4, 3), 2, density=0.4)
    expected = completion_oracle(x, params)
    np.testing.assert_allclose(net.completion_forward(x, params, 'dense'), expected, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(net.completion_forward(x, params, 'sparse'), expected, rtol=1e-9, atol=1e-12)


def test_completion_params_channels():
    kernels = [np.zeros((k, k, k, 2, 2)) for k in (3, 5, 7, 3, 3, 5, 7, 3, 5, 7, 3)]
    kernels[4] = np.zeros((3, 3, 3, 2, 1))
    with pytest.raises(ArgumentError):
        net.CompletionParams.from_kernels(kernels)
    with pytest.raises(ArgumentError):
        net.CompletionParams.from_kernels(kernels[:10])


def test_init_completion_params_deterministic():
    a = net.init_completion_params(2, seed=5)
    b = net.init_completion_params(2, seed=5)
    for ka, kb in zip(a.kernels(), b.kernels()):
        np.testing.assert_array_equal(ka.weights, kb.weights)
        s = 1.0 / np.sqrt(ka.k ** 3 * 2)
        assert np.all(np.abs(ka.weights) <= s)
