from typing import Dict, List, Optional, Union

import numpy as np

from vsl.absorption.model import N_BANDS, AbsorptionLabel, ShapeMismatchError
from vsl.absorption.nn.architecture import LayerKind, LayerSpec, ModelSpec, OutputHead
from vsl.absorption.nn.layers import Conv1d, Dense, Elu, Flatten, Layer, MaxPool1d, Relu, Sigmoid

INVERSE_FLOOR = 1e-3


def build_layer(spec: LayerSpec, in_shape, rng: Optional[np.random.Generator], dtype) -> Layer:
    match spec.kind:
        case LayerKind.DENSE:
            return Dense(int(np.prod(in_shape)), spec.out_dim, rng, dtype)
        case LayerKind.CONV1D:
            in_channels = 1 if len(in_shape) == 1 else in_shape[0]
            return Conv1d(in_channels, spec.filters, spec.width, rng, dtype)
        case LayerKind.MAXPOOL:
            return MaxPool1d(spec.width)
        case LayerKind.ELU:
            return Elu()
        case LayerKind.SIGMOID:
            return Sigmoid()
        case LayerKind.RELU:
            return Relu()
        case LayerKind.FLATTEN:
            return Flatten()
    raise ShapeMismatchError(f"unsupported layer {spec}")


class Network(object):
    """
    Sequential stack built from a ModelSpec. Parameters are addressed by name,
    `layers.{i}.weight` and `layers.{i}.bias`, which is also the order they are
    serialized and updated in.
    """

    def __init__(self, spec: ModelSpec, rng: Optional[np.random.Generator] = None, dtype=np.float32):
        self.spec = spec
        self.dtype = np.dtype(dtype)
        trace = spec.shape_trace()
        self.layers: List[Layer] = [
            build_layer(layer, trace[i], rng, self.dtype) for i, layer in enumerate(spec.layers())
        ]

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim == 1:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.spec.input_dim:
            raise ShapeMismatchError(f"expected input of shape (batch, {self.spec.input_dim}), got {x.shape}")
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, dy: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            dy = layer.backward(dy)
        return dy

    def zero_grad(self):
        for layer in self.layers:
            layer.zero_grad()

    @property
    def params(self) -> Dict[str, np.ndarray]:
        return {f"layers.{i}.{k}": v for i, layer in enumerate(self.layers) for k, v in layer.params.items()}

    @property
    def grads(self) -> Dict[str, np.ndarray]:
        return {f"layers.{i}.{k}": v for i, layer in enumerate(self.layers) for k, v in layer.grads.items()}

    def set_params(self, params: Dict[str, np.ndarray]):
        own = self.params
        if set(own) != set(params):
            raise ShapeMismatchError(f"parameter names differ: {sorted(set(own) ^ set(params))}")
        for name, value in params.items():
            if own[name].shape != value.shape:
                raise ShapeMismatchError(f"{name}: expected shape {own[name].shape}, got {value.shape}")
            i, key = name.split(".")[1:]
            self.layers[int(i)].params[key] = np.array(value, dtype=self.dtype)

    def copy_params(self) -> Dict[str, np.ndarray]:
        return {k: v.copy() for k, v in self.params.items()}

    def n_params(self) -> int:
        return sum(v.size for v in self.params.values())


def mse_loss(pred: np.ndarray, target: np.ndarray, reduction: str = "mean"):
    """
    Squared error loss and its gradient w.r.t. pred.
    'mean' divides by the number of elements, 'sum' does not.
    """
    if pred.shape != target.shape:
        raise ShapeMismatchError(f"prediction shape {pred.shape} differs from target shape {target.shape}")
    diff = pred - target.astype(pred.dtype)
    match reduction:
        case "mean":
            return float(np.mean(diff * diff)), (2.0 / diff.size) * diff
        case "sum":
            return float(np.sum(diff * diff)), 2.0 * diff
    raise ValueError(f"unknown reduction {reduction}")


def targets_for_head(labels: np.ndarray, head: OutputHead) -> np.ndarray:
    """Map stored [alpha_bar; s_bar] label rows to the regression target of a head."""
    labels = np.atleast_2d(labels)
    match head:
        case OutputHead.ALPHA:
            return labels[:, :N_BANDS]
        case OutputHead.INVERSE_ALPHA:
            return 1.0 / np.maximum(labels[:, :N_BANDS], INVERSE_FLOOR)
        case OutputHead.ALPHA_AND_SCATTERING:
            if labels.shape[1] < 2 * N_BANDS:
                raise ShapeMismatchError("scattering head needs labels with mean scattering")
            return labels[:, :2 * N_BANDS]
    raise ShapeMismatchError(f"unknown head {head}")


class Model(object):
    """Network plus the provenance of how its weights came about."""

    def __init__(self, spec: ModelSpec, network: Optional[Network] = None, provenance: Optional[dict] = None,
                 seed: int = 0, dtype=np.float32):
        self.spec = spec
        self.network = network if network is not None else Network(spec, np.random.default_rng(seed), dtype)
        self.provenance = dict(provenance or {})

    @property
    def head(self) -> OutputHead:
        return self.spec.head

    def forward(self, x: np.ndarray) -> np.ndarray:
        return self.network.forward(x)

    def loss(self, x: np.ndarray, labels: np.ndarray) -> float:
        return mse_loss(self.forward(x), targets_for_head(labels, self.head))[0]

    def backward(self, x: np.ndarray, labels: np.ndarray) -> float:
        """Forward then backward pass; gradients are left on the layers."""
        loss, dy = mse_loss(self.forward(x), targets_for_head(labels, self.head))
        self.network.backward(dy)
        return loss

    def __str__(self):
        return (f"Model["
                f"spec={self.spec}, "
                f"n_params={self.network.n_params()}, "
                f"provenance={self.provenance}"
                f"]")


def raw_to_alpha(out: np.ndarray, head: OutputHead) -> np.ndarray:
    """Head output to absorption in [0,1]; the inverse head is reciprocated then clamped."""
    match head:
        case OutputHead.INVERSE_ALPHA:
            with np.errstate(divide="ignore"):
                return np.clip(1.0 / out, 0.0, 1.0)
        case _:
            return np.clip(out[..., :N_BANDS], 0.0, 1.0)


def predict(model: Model, vectors: np.ndarray) -> Union[AbsorptionLabel, List[AbsorptionLabel]]:
    x = np.asarray(vectors)
    single = x.ndim == 1
    out = model.forward(x).astype(float)
    alpha = raw_to_alpha(out, model.head)
    scattering = np.clip(out[:, N_BANDS:], 0.0, 1.0) if model.head == OutputHead.ALPHA_AND_SCATTERING else None
    labels = [
        AbsorptionLabel(alpha[i], None if scattering is None else scattering[i]) for i in range(out.shape[0])
    ]
    return labels[0] if single else labels
