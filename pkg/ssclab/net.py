"""Forward pass of the completion network.

Every layer is a bias-free, normalization-free dense 3D convolution with stride 1
and same-size zero padding, so an empty (all-zero) region of the input stays exactly
zero except within the receptive field of occupied voxels. Multi-path blocks run 3, 5
and 7 wide kernels in parallel, sum the branches and rectify.
"""
from dataclasses import dataclass
import numpy as np
from . import comp
from . import log
from . import parallel
from .exception import ArgumentError
from . import io as sscio


@dataclass
class ConvKernel:
    """k x k x k x C_in x C_out cross-correlation weights without bias"""
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 5 or not (w.shape[0] == w.shape[1] == w.shape[2]):
            raise ArgumentError('Kernel must be k x k x k x C_in x C_out, got {}'.format(w.shape))
        if w.shape[0] not in (3, 5, 7):
            raise ArgumentError('Kernel size must be 3, 5 or 7 [k={}]'.format(w.shape[0]))
        if not np.all(np.isfinite(w)):
            raise ArgumentError('Kernel weights must be finite')
        self.weights = w

    @property
    def k(self):
        return self.weights.shape[0]

    @property
    def radius(self):
        return self.k // 2

    @property
    def c_in(self):
        return self.weights.shape[3]

    @property
    def c_out(self):
        return self.weights.shape[4]


@dataclass
class MPBParams:
    k3: ConvKernel
    k5: ConvKernel
    k7: ConvKernel

    def __post_init__(self):
        for name, k in (('k3', 3), ('k5', 5), ('k7', 7)):
            if getattr(self, name).k != k:
                raise ArgumentError('{} must have kernel size {}'.format(name, k))
        if len({(b.c_in, b.c_out) for b in self.branches()}) != 1:
            raise ArgumentError('Multi-path branches must share C_in and C_out')

    def branches(self):
        return (self.k3, self.k5, self.k7)

    @property
    def radius(self):
        return max(b.radius for b in self.branches())


@dataclass
class CompletionParams:
    upper_mpb: MPBParams
    mid_in: ConvKernel
    mid_mpb1: MPBParams
    mid_mpb2: MPBParams
    mid_out: ConvKernel

    def __post_init__(self):
        if self.mid_in.k != 3 or self.mid_out.k != 3:
            raise ArgumentError('Middle branch input and output convolutions must be 3x3x3')
        channels = {(k.c_in, k.c_out) for k in self.kernels()}
        if channels != {(self.channels, self.channels)}:
            raise ArgumentError('All kernels must map C_f channels to C_f channels')

    @property
    def channels(self):
        return self.mid_in.c_in

    def kernels(self):
        """Kernels in serialization order"""
        return [*self.upper_mpb.branches(), self.mid_in, *self.mid_mpb1.branches(),
                *self.mid_mpb2.branches(), self.mid_out]

    @staticmethod
    def from_kernels(kernels):
        if len(kernels) != 11:
            raise ArgumentError('Completion network needs 11 kernels, got {}'.format(len(kernels)))
        k = [w if isinstance(w, ConvKernel) else ConvKernel(w) for w in kernels]
        return CompletionParams(MPBParams(*k[0:3]), k[3], MPBParams(*k[4:7]), MPBParams(*k[7:10]), k[10])


# ------------------------------------------------------------------------------------------------
# Convolution backends

class ConvBackend(comp.Component):
    """3D cross-correlation, stride 1, zero padding (k-1)/2"""
    def conv3d(self, input, weights):
        raise NotImplementedError


@comp.ssc_component('conv::dense')
class DenseConv(ConvBackend):
    """Loops over kernel taps, accumulating shifted slices of the padded input.

    Properties
    - ``tiles``: number of slabs along x processed through the parallel subsystem
      (default: number of threads). Every voxel sums its taps in the same order
      regardless of the tiling.
    """
    def construct(self, prop):
        self.tiles = prop.get('tiles')
        return self.tiles is None or (isinstance(self.tiles, int) and self.tiles >= 1)

    def conv3d(self, input, weights):
        k = weights.shape[0]
        r = k // 2
        L, W, H, _ = input.shape
        padded = np.pad(input, ((r, r), (r, r), (r, r), (0, 0)))
        taps = [(a, b, c) for a in range(k) for b in range(k) for c in range(k)
                if np.any(weights[a, b, c])]
        tiles = min(L, self.tiles or parallel.num_threads())
        bounds = np.linspace(0, L, tiles + 1).astype(int)

        def process(t):
            x0, x1 = bounds[t], bounds[t + 1]
            out = np.zeros((x1 - x0, W, H, weights.shape[4]))
            for a, b, c in taps:
                out += padded[x0 + a:x1 + a, b:b + W, c:c + H] @ weights[a, b, c]
            return out

        return np.concatenate(parallel.foreach(range(tiles), process), axis=0)


@comp.ssc_component('conv::sparse')
class SparseConv(ConvBackend):
    """Scatters every non-empty input voxel into its output neighborhood"""
    def conv3d(self, input, weights):
        k = weights.shape[0]
        r = k // 2
        dims = np.asarray(input.shape[:3])
        out = np.zeros(tuple(dims) + (weights.shape[4],))
        occupied = np.any(input != 0, axis=-1)
        idx = np.argwhere(occupied)
        if len(idx) == 0:
            return out
        feats = input[occupied]
        flat = out.reshape(-1, weights.shape[4])
        for a in range(k):
            for b in range(k):
                for c in range(k):
                    w = weights[a, b, c]
                    if not np.any(w):
                        continue
                    pos = idx - (np.array([a, b, c]) - r)
                    ok = np.all((pos >= 0) & (pos < dims), axis=1)
                    if not np.any(ok):
                        continue
                    lin = (pos[ok, 0] * dims[1] + pos[ok, 1]) * dims[2] + pos[ok, 2]
                    np.add.at(flat, lin, feats[ok] @ w)
        return out


_backends = {}


def _backend(method):
    if method not in _backends:
        _backends[method] = comp.create('conv::' + method, interface=ConvBackend)
    return _backends[method]


# ------------------------------------------------------------------------------------------------
# Layers

def conv3d(input, kernel, method='dense'):
    """Bias-free 3D cross-correlation preserving the spatial dims"""
    input = np.asarray(input, dtype=np.float64)
    if input.ndim != 4 or min(input.shape[:3]) < 1:
        raise ArgumentError('Input must be an L x W x H x C_in volume, got {}'.format(input.shape))
    if not isinstance(kernel, ConvKernel):
        kernel = ConvKernel(kernel)
    if input.shape[3] != kernel.c_in:
        raise ArgumentError('Channel mismatch: input has {}, kernel expects {}'.format(input.shape[3], kernel.c_in))
    return _backend(method).conv3d(input, kernel.weights)


def mpb_forward(input, params, method='dense'):
    """Sum of the 3/5/7 branches followed by max(., 0)"""
    out = conv3d(input, params.k3, method)
    out += conv3d(input, params.k5, method)
    out += conv3d(input, params.k7, method)
    return np.maximum(out, 0.0)


def completion_forward(input, params, method='dense'):
    """Upper multi-path branch + middle branch + residual"""
    input = np.asarray(input, dtype=np.float64)
    if input.ndim != 4 or input.shape[3] != params.channels:
        raise ArgumentError('Input must have {} channels'.format(params.channels))
    upper = mpb_forward(input, params.upper_mpb, method)
    mid = conv3d(input, params.mid_in, method)
    mid = mpb_forward(mid, params.mid_mpb1, method)
    mid = mpb_forward(mid, params.mid_mpb2, method)
    mid = conv3d(mid, params.mid_out, method)
    log.debug('Completion forward [dims={}, channels={}, method={}]'.format(input.shape[:3], params.channels, method))
    return upper + mid + input


def receptive_radius(params):
    """Chebyshev radius by which the network can dilate the occupied support"""
    upper = params.upper_mpb.radius
    mid = params.mid_in.radius + params.mid_mpb1.radius + params.mid_mpb2.radius + params.mid_out.radius
    return max(upper, mid, 0)


# ------------------------------------------------------------------------------------------------
# Parameters

def init_kernel(rng, k, c_in, c_out):
    s = 1.0 / np.sqrt(k ** 3 * c_in)
    return ConvKernel(rng.uniform(-s, s, size=(k, k, k, c_in, c_out)))


def init_completion_params(channels, seed=42):
    """Seeded uniform initialization in [-s, s], s = 1/sqrt(k^3 C_in)"""
    if channels < 1:
        raise ArgumentError('channels must be >= 1')
    rng = np.random.default_rng(seed)
    sizes = [3, 5, 7, 3, 3, 5, 7, 3, 5, 7, 3]
    return CompletionParams.from_kernels([init_kernel(rng, k, channels, channels) for k in sizes])


def zero_completion_params(channels):
    sizes = [3, 5, 7, 3, 3, 5, 7, 3, 5, 7, 3]
    return CompletionParams.from_kernels([np.zeros((k, k, k, channels, channels)) for k in sizes])


def save_params(params, path):
    sscio.write_weights([k.weights for k in params.kernels()], path)


def load_params(path):
    return CompletionParams.from_kernels(sscio.read_weights(path))
