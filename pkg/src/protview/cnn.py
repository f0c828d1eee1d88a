"""Small convolutional classifier trained with plain SGD.

Everything runs in float64; the conv/pool inner loops go through the kernel
backend (compiled extension when built, vectorized numpy otherwise).
Determinism and finite-difference gradient checks take priority over speed.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .errors import EmptyDatasetError, LabelOutOfRangeError, ShapeMismatchError

PREDICT_BATCH = 64


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    batch_size: int = 30
    learning_rate: float = 0.001
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1 or self.batch_size < 1 or self.learning_rate <= 0:
            raise ValueError("invalid training configuration")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Conv:
    out_channels: int
    kernel: int = 3
    pad: int = 1


@dataclass(frozen=True)
class ReLU:
    pass


@dataclass(frozen=True)
class MaxPool:
    size: int = 2


@dataclass(frozen=True)
class Flatten:
    pass


@dataclass(frozen=True)
class Dense:
    out_features: int


LayerSpec = Conv | ReLU | MaxPool | Flatten | Dense


@dataclass(frozen=True)
class NetworkSpec:
    input_shape: tuple[int, int, int]  # (height, width, channels)
    layers: tuple[LayerSpec, ...]

    def __post_init__(self) -> None:
        shape = self.input_shape
        for layer in self.layers:
            shape = _out_shape(layer, shape)
        if len(shape) != 1:
            raise ShapeMismatchError("network must end in a flat class vector")

    @property
    def n_classes(self) -> int:
        shape = self.input_shape
        for layer in self.layers:
            shape = _out_shape(layer, shape)
        return shape[0]

    def to_json(self) -> str:
        entries = []
        for layer in self.layers:
            d = {"type": type(layer).__name__.lower()}
            d.update(asdict(layer))
            entries.append(d)
        return json.dumps({"input_shape": list(self.input_shape), "layers": entries})

    @classmethod
    def from_json(cls, text: str) -> "NetworkSpec":
        data = json.loads(text)
        types = {"conv": Conv, "relu": ReLU, "maxpool": MaxPool, "flatten": Flatten, "dense": Dense}
        layers = []
        for entry in data["layers"]:
            kind = types[entry.pop("type")]
            layers.append(kind(**entry))
        return cls(tuple(data["input_shape"]), tuple(layers))


def _out_shape(layer: LayerSpec, shape: tuple) -> tuple:
    if isinstance(layer, Conv):
        h, w, c = shape
        ho = h + 2 * layer.pad - layer.kernel + 1
        wo = w + 2 * layer.pad - layer.kernel + 1
        if ho < 1 or wo < 1:
            raise ShapeMismatchError("conv output collapsed")
        return (ho, wo, layer.out_channels)
    if isinstance(layer, MaxPool):
        h, w, c = shape
        if h % layer.size or w % layer.size:
            raise ShapeMismatchError(f"pool size {layer.size} must divide {h}x{w}")
        return (h // layer.size, w // layer.size, c)
    if isinstance(layer, Flatten):
        return (int(np.prod(shape)),)
    if isinstance(layer, Dense):
        if len(shape) != 1:
            raise ShapeMismatchError("dense layer needs a flat input")
        return (layer.out_features,)
    return shape


def default_network_spec(n_classes: int, image_size: int = 64, channels: int = 3) -> NetworkSpec:
    """Conv(3x3,8) -> ReLU -> pool2 -> Conv(3x3,16) -> ReLU -> pool2 ->
    Flatten -> Dense(n_classes); the final width tracks the dataset."""
    return NetworkSpec(
        input_shape=(image_size, image_size, channels),
        layers=(
            Conv(8), ReLU(), MaxPool(2),
            Conv(16), ReLU(), MaxPool(2),
            Flatten(), Dense(n_classes),
        ),
    )


# -- conv / pool primitives ---------------------------------------------------
# Activations are channels-last (n, h, w, c); conv weights are (out, in, k, k).
# The padded input is cached for the backward pass.


def _conv_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray, pad: int):
    o, c, k, _ = w.shape
    xp = np.ascontiguousarray(np.pad(x, ((0, 0), (pad, pad), (pad, pad), (0, 0))))
    w2 = np.ascontiguousarray(w.transpose(2, 3, 1, 0))  # (ky, kx, c, o)
    return kernels.conv2d_forward(xp, w2, b), xp


def _conv_backward(xp: np.ndarray, w: np.ndarray, gy: np.ndarray, pad: int, need_gx: bool):
    o, c, k, _ = w.shape
    gy = np.ascontiguousarray(gy)
    gw = kernels.conv2d_grad_w(xp, gy).transpose(3, 2, 0, 1)
    gb = gy.sum(axis=(0, 1, 2))
    if not need_gx:
        return None, gw, gb
    # full correlation of gy with the flipped kernel gives gx (minus padding)
    edge = k - 1 - pad
    gyp = np.ascontiguousarray(np.pad(gy, ((0, 0), (edge, edge), (edge, edge), (0, 0))))
    wf = np.ascontiguousarray(w.transpose(2, 3, 0, 1)[::-1, ::-1])  # (ky, kx, o, c)
    gx = kernels.conv2d_forward(gyp, wf, np.zeros(c))
    return gx, gw, gb


# -- network ------------------------------------------------------------------


class Network:
    """Parameterized network; immutable spec, mutable parameter arrays."""

    def __init__(self, spec: NetworkSpec, params: list[list[np.ndarray]]):
        self.spec = spec
        self.params = params

    @classmethod
    def initialize(cls, spec: NetworkSpec, seed: int) -> "Network":
        """He-style fan-in-scaled random init, reproducible per seed."""
        rng = np.random.default_rng(seed)
        params: list[list[np.ndarray]] = []
        shape = spec.input_shape
        for layer in spec.layers:
            if isinstance(layer, Conv):
                fan_in = shape[2] * layer.kernel * layer.kernel
                w = rng.standard_normal((layer.out_channels, shape[2], layer.kernel, layer.kernel))
                params.append([w * np.sqrt(2.0 / fan_in), np.zeros(layer.out_channels)])
            elif isinstance(layer, Dense):
                fan_in = shape[0]
                w = rng.standard_normal((layer.out_features, fan_in))
                params.append([w * np.sqrt(2.0 / fan_in), np.zeros(layer.out_features)])
            else:
                params.append([])
            shape = _out_shape(layer, shape)
        return cls(spec, params)

    @property
    def n_classes(self) -> int:
        return self.spec.n_classes

    def _check_input(self, x: np.ndarray) -> None:
        if x.ndim != 4 or x.shape[1:] != self.spec.input_shape:
            raise ShapeMismatchError(
                f"expected input (n, {', '.join(map(str, self.spec.input_shape))}), got {x.shape}"
            )

    def forward_logits(self, x: np.ndarray, keep_caches: bool = False):
        self._check_input(x)
        caches = []
        out = x
        for layer, p in zip(self.spec.layers, self.params):
            if isinstance(layer, Conv):
                out, xp = _conv_forward(out, p[0], p[1], layer.pad)
                caches.append(xp if keep_caches else None)
            elif isinstance(layer, ReLU):
                mask = out > 0
                caches.append(mask)
                out = out * mask
            elif isinstance(layer, MaxPool):
                out, idx = kernels.maxpool_forward(np.ascontiguousarray(out), layer.size)
                caches.append(idx)
            elif isinstance(layer, Flatten):
                caches.append(out.shape)
                out = out.reshape(out.shape[0], -1)
            else:  # Dense
                caches.append(out)
                out = out @ p[0].T + p[1]
        return (out, caches) if keep_caches else out

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Softmax class probabilities; rows sum to 1."""
        return _softmax(self.forward_logits(x))

    def loss_and_grad(self, x: np.ndarray, labels: np.ndarray):
        """Mean cross-entropy (log-sum-exp stable) and per-parameter grads."""
        labels = np.asarray(labels)
        if labels.shape != (x.shape[0],):
            raise ShapeMismatchError("one label per sample required")
        nk = self.n_classes
        if labels.size and (labels.min() < 0 or labels.max() >= nk):
            raise LabelOutOfRangeError(f"labels must lie in [0, {nk})")
        logits, caches = self.forward_logits(x, keep_caches=True)
        n = x.shape[0]
        m = logits.max(axis=1, keepdims=True)
        lse = m[:, 0] + np.log(np.exp(logits - m).sum(axis=1))
        loss = float((lse - logits[np.arange(n), labels]).mean())

        gy = _softmax(logits)
        gy[np.arange(n), labels] -= 1.0
        gy /= n
        grads: list[list[np.ndarray]] = [[] for _ in self.spec.layers]
        for li in range(len(self.spec.layers) - 1, -1, -1):
            layer, p, cache = self.spec.layers[li], self.params[li], caches[li]
            if isinstance(layer, Conv):
                gy, gw, gb = _conv_backward(cache, p[0], gy, layer.pad, need_gx=li > 0)
                grads[li] = [gw, gb]
            elif isinstance(layer, ReLU):
                gy = gy * cache
            elif isinstance(layer, MaxPool):
                gy = kernels.maxpool_backward(np.ascontiguousarray(gy), cache, layer.size)
            elif isinstance(layer, Flatten):
                gy = gy.reshape(cache)
            else:  # Dense
                grads[li] = [gy.T @ cache, gy.sum(axis=0)]
                gy = gy @ p[0]
        return loss, grads

    def sgd_step(self, grads, learning_rate: float) -> None:
        for p, g in zip(self.params, grads):
            for arr, grad in zip(p, g):
                arr -= learning_rate * grad


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def images_to_batch(images: np.ndarray) -> np.ndarray:
    """(n, H, W, 3) uint8 pixels -> float64 scaled to [0, 1] (channels last).

    Pixel/255 is the only input normalization applied anywhere."""
    arr = np.asarray(images)
    if arr.ndim != 4 or arr.shape[3] != 3:
        raise ShapeMismatchError(f"expected (n, H, W, 3) pixels, got {arr.shape}")
    return arr.astype(np.float64) / 255.0


def _is_pixel_stack(images: np.ndarray) -> bool:
    return images.ndim == 4 and images.shape[3] == 3 and images.dtype == np.uint8


def predict(network: Network, images: np.ndarray) -> np.ndarray:
    """Class-probability rows for a stack of inputs (empty stack -> 0 rows).

    Accepts float (n, C, H, W) batches in [0, 1] or uint8 (n, H, W, 3)
    pixel stacks, converted chunk by chunk.
    """
    images = np.asarray(images)
    if len(images) == 0:
        return np.zeros((0, network.n_classes))
    pixels = _is_pixel_stack(images)
    chunks = []
    for i in range(0, len(images), PREDICT_BATCH):
        batch = images[i : i + PREDICT_BATCH]
        chunks.append(network.forward(images_to_batch(batch) if pixels else batch))
    return np.vstack(chunks)


def train(
    images: np.ndarray,
    labels: np.ndarray,
    spec: NetworkSpec,
    config: TrainConfig | None = None,
) -> tuple[Network, list[float]]:
    """Plain SGD (no momentum, fixed rate) with seeded per-epoch shuffling.

    Returns the trained network and the per-epoch mean training loss.
    Deterministic for a fixed config seed; the last partial batch is kept.
    """
    config = config or TrainConfig()
    images = np.asarray(images)
    labels = np.asarray(labels)
    if len(images) == 0:
        raise EmptyDatasetError("no training samples")
    if len(images) != len(labels):
        raise ShapeMismatchError("images and labels differ in length")
    pixels = _is_pixel_stack(images)
    if not pixels:
        images = images.astype(np.float64, copy=False)
    network = Network.initialize(spec, config.seed)
    rng = np.random.default_rng(config.seed)
    history: list[float] = []
    n = len(images)
    for _ in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            x = images_to_batch(images[batch]) if pixels else images[batch]
            loss, grads = network.loss_and_grad(x, labels[batch])
            network.sgd_step(grads, config.learning_rate)
            total += loss * len(batch)
        history.append(total / n)
    return network, history


# -- persistence ---------------------------------------------------------------


def save_network(network: Network, path) -> None:
    """Checkpoint: npz holding the spec JSON plus flat parameter arrays
    named p{layer}_{slot}."""
    arrays = {
        f"p{li}_{si}": arr
        for li, group in enumerate(network.params)
        for si, arr in enumerate(group)
    }
    np.savez(path, spec=np.frombuffer(network.spec.to_json().encode(), dtype=np.uint8), **arrays)


def load_network(path) -> Network:
    with np.load(path) as data:
        spec = NetworkSpec.from_json(bytes(data["spec"]).decode())
        params: list[list[np.ndarray]] = []
        for li, layer in enumerate(spec.layers):
            group = []
            for si in range(2):
                key = f"p{li}_{si}"
                if key in data:
                    group.append(np.array(data[key]))
            params.append(group)
    return Network(spec, params)


# -- gradient check -------------------------------------------------------------


def gradient_check_spec(channels: int = 3, image_size: int = 8, n_classes: int = 3) -> NetworkSpec:
    return NetworkSpec(
        input_shape=(image_size, image_size, channels),
        layers=(Conv(4), ReLU(), MaxPool(2), Conv(8), ReLU(), MaxPool(2), Flatten(), Dense(n_classes)),
    )


def gradient_check(spec: NetworkSpec | None = None, seed: int = 0, eps: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients."""
    spec = spec or gradient_check_spec()
    rng = np.random.default_rng(seed)
    net = Network.initialize(spec, seed)
    x = rng.random((2, *spec.input_shape))
    y = rng.integers(0, spec.n_classes, size=2)
    _, grads = net.loss_and_grad(x, y)
    worst = 0.0
    for group, ggroup in zip(net.params, grads):
        for arr, grad in zip(group, ggroup):
            flat = arr.reshape(-1)
            gflat = grad.reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + eps
                lo_hi = net.loss_and_grad(x, y)[0]
                flat[i] = orig - eps
                lo_lo = net.loss_and_grad(x, y)[0]
                flat[i] = orig
                numeric = (lo_hi - lo_lo) / (2.0 * eps)
                denom = max(abs(gflat[i]) + abs(numeric), 1e-8)
                worst = max(worst, abs(gflat[i] - numeric) / denom)
    return worst
