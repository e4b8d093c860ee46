from enum import Enum
from typing import Final, List, Optional, Tuple

from vsl.absorption.model import N_BANDS, ShapeMismatchError

INPUT_DIM: Final = 8000


class LayerKind(str, Enum):
    DENSE = "dense"
    CONV1D = "conv1d"
    MAXPOOL = "maxpool"
    ELU = "elu"
    SIGMOID = "sigmoid"
    RELU = "relu"
    FLATTEN = "flatten"


class LayerSpec(object):

    def __init__(self, kind: LayerKind, out_dim: Optional[int] = None, filters: Optional[int] = None,
                 width: Optional[int] = None):
        self.kind = LayerKind(kind)
        self.out_dim = out_dim
        self.filters = filters
        self.width = width
        match self.kind:
            case LayerKind.DENSE:
                if not out_dim or out_dim < 1:
                    raise ShapeMismatchError("dense layer needs a positive out_dim")
            case LayerKind.CONV1D:
                if not filters or not width or width % 2 != 1:
                    raise ShapeMismatchError(f"conv1d needs filters and an odd width, got {filters}, {width}")
            case LayerKind.MAXPOOL:
                if not width or width < 1:
                    raise ShapeMismatchError("maxpool needs a positive width")

    @staticmethod
    def dense(out_dim: int) -> "LayerSpec":
        return LayerSpec(LayerKind.DENSE, out_dim=out_dim)

    @staticmethod
    def conv1d(filters: int, width: int) -> "LayerSpec":
        return LayerSpec(LayerKind.CONV1D, filters=filters, width=width)

    @staticmethod
    def maxpool(width: int) -> "LayerSpec":
        return LayerSpec(LayerKind.MAXPOOL, width=width)

    @staticmethod
    def elu() -> "LayerSpec":
        return LayerSpec(LayerKind.ELU)

    @staticmethod
    def sigmoid() -> "LayerSpec":
        return LayerSpec(LayerKind.SIGMOID)

    @staticmethod
    def relu() -> "LayerSpec":
        return LayerSpec(LayerKind.RELU)

    @staticmethod
    def flatten() -> "LayerSpec":
        return LayerSpec(LayerKind.FLATTEN)

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value}
        for key in ("out_dim", "filters", "width"):
            if getattr(self, key) is not None:
                d[key] = getattr(self, key)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LayerSpec":
        return cls(d["kind"], d.get("out_dim"), d.get("filters"), d.get("width"))

    def __eq__(self, other):
        return isinstance(other, LayerSpec) and self.to_dict() == other.to_dict()

    def __str__(self):
        match self.kind:
            case LayerKind.DENSE:
                return f"dense({self.out_dim})"
            case LayerKind.CONV1D:
                return f"conv1d({self.filters},{self.width})"
            case LayerKind.MAXPOOL:
                return f"maxpool({self.width})"
        return self.kind.value

    __repr__ = __str__


class OutputHead(str, Enum):
    ALPHA = "alpha"
    INVERSE_ALPHA = "inverse_alpha"
    ALPHA_AND_SCATTERING = "alpha_and_scattering"

    @property
    def dim(self) -> int:
        return 2 * N_BANDS if self == OutputHead.ALPHA_AND_SCATTERING else N_BANDS

    @property
    def activation(self) -> LayerSpec:
        return LayerSpec.relu() if self == OutputHead.INVERSE_ALPHA else LayerSpec.sigmoid()


class ModelSpec(object):
    """Hidden architecture plus output head; the head adds dense(dim) and its activation."""

    def __init__(self, architecture: List[LayerSpec], head: OutputHead = OutputHead.ALPHA, input_dim: int = INPUT_DIM,
                 name: str = "custom"):
        self.architecture = list(architecture)
        self.head = OutputHead(head)
        self.input_dim = int(input_dim)
        self.name = name
        self.shape_trace()

    @classmethod
    def mlp(cls, head: OutputHead = OutputHead.ALPHA, input_dim: int = INPUT_DIM) -> "ModelSpec":
        return cls([
            LayerSpec.dense(128), LayerSpec.elu(),
            LayerSpec.dense(64), LayerSpec.elu(),
            LayerSpec.dense(32), LayerSpec.elu(),
        ], head, input_dim, "mlp")

    @classmethod
    def cnn(cls, head: OutputHead = OutputHead.ALPHA, input_dim: int = INPUT_DIM) -> "ModelSpec":
        return cls([
            LayerSpec.conv1d(64, 33), LayerSpec.maxpool(4), LayerSpec.elu(),
            LayerSpec.conv1d(32, 17), LayerSpec.maxpool(4), LayerSpec.elu(),
            LayerSpec.conv1d(16, 9), LayerSpec.maxpool(4), LayerSpec.elu(),
            LayerSpec.flatten(),
            LayerSpec.dense(32), LayerSpec.elu(),
        ], head, input_dim, "cnn")

    @classmethod
    def preset(cls, name: str, head: OutputHead = OutputHead.ALPHA, input_dim: int = INPUT_DIM) -> "ModelSpec":
        match name.lower():
            case "mlp":
                return cls.mlp(head, input_dim)
            case "cnn":
                return cls.cnn(head, input_dim)
        raise ShapeMismatchError(f"unknown architecture preset {name}")

    def layers(self) -> List[LayerSpec]:
        return self.architecture + [LayerSpec.dense(self.head.dim), self.head.activation]

    def shape_trace(self) -> List[Tuple[int, ...]]:
        """Per-sample shapes after each layer, starting with the input."""
        shape: Tuple[int, ...] = (self.input_dim,)
        trace = [shape]
        for layer in self.layers():
            match layer.kind:
                case LayerKind.CONV1D:
                    shape = (layer.filters, shape[-1])
                case LayerKind.MAXPOOL:
                    if shape[-1] % layer.width:
                        raise ShapeMismatchError(f"pool width {layer.width} does not divide length {shape[-1]}")
                    shape = shape[:-1] + (shape[-1] // layer.width,)
                case LayerKind.FLATTEN | LayerKind.DENSE:
                    flat = 1
                    for s in shape:
                        flat *= s
                    shape = (flat,) if layer.kind == LayerKind.FLATTEN else (layer.out_dim,)
            trace.append(shape)
        return trace

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "head": self.head.value,
            "input_dim": self.input_dim,
            "architecture": [layer.to_dict() for layer in self.architecture],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls([LayerSpec.from_dict(x) for x in d["architecture"]], OutputHead(d["head"]), d["input_dim"],
                   d.get("name", "custom"))

    def __eq__(self, other):
        return isinstance(other, ModelSpec) and self.to_dict() == other.to_dict()

    def __str__(self):
        return (f"ModelSpec["
                f"name={self.name}, "
                f"input_dim={self.input_dim}, "
                f"layers={self.architecture}, "
                f"head={self.head.value}"
                f"]")
