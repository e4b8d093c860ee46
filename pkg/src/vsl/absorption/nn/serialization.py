import struct
from pathlib import Path
from typing import Dict, Final, Optional, Union

import numpy as np
import tomli
import tomli_w

from vsl.absorption.model import CorruptModelError, ShapeMismatchError
from vsl.absorption.nn.architecture import ModelSpec
from vsl.absorption.nn.network import Model, Network
from vsl.absorption.utils import write_bytes_synced

MAGIC: Final = b"ABSK"
VERSION: Final = 1
TENSOR_DTYPE: Final = np.dtype("<f4")


def dumps_model(model: Model) -> bytes:
    """
    Layout: magic, u16 version, u32 header length, TOML header, then per tensor
    u16 name length, name, u8 ndim, ndim x u32 dims, little-endian float32 data.
    """
    header = tomli_w.dumps({"spec": model.spec.to_dict(), "provenance": model.provenance}).encode("utf-8")
    parts = [MAGIC, struct.pack("<HI", VERSION, len(header)), header]
    for name, value in model.network.params.items():
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<B", value.ndim))
        parts.append(struct.pack(f"<{value.ndim}I", *value.shape))
        parts.append(np.ascontiguousarray(value, dtype=TENSOR_DTYPE).tobytes())
    return b"".join(parts)


class _Reader(object):

    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, n: int, what: str) -> bytes:
        if self.offset + n > len(self.data):
            raise CorruptModelError(f"truncated model file while reading {what}", self.offset)
        chunk = self.data[self.offset:self.offset + n]
        self.offset += n
        return chunk

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def loads_model(data: bytes, input_dim: Optional[int] = None) -> Model:
    reader = _Reader(data)
    if reader.take(len(MAGIC), "magic") != MAGIC:
        raise CorruptModelError("not a model file", 0)
    version, header_len = reader.unpack("<HI", "version")
    if version != VERSION:
        raise CorruptModelError(f"unsupported model format version {version}", len(MAGIC))
    header_offset = reader.offset
    try:
        header = tomli.loads(reader.take(header_len, "header").decode("utf-8"))
        spec = ModelSpec.from_dict(header["spec"])
    except (UnicodeDecodeError, tomli.TOMLDecodeError, KeyError) as e:
        raise CorruptModelError(f"unreadable header: {e}", header_offset) from e
    if input_dim is not None and spec.input_dim != input_dim:
        raise ShapeMismatchError(f"model expects input_dim {spec.input_dim}, caller has {input_dim}")

    params: Dict[str, np.ndarray] = {}
    while reader.offset < len(data):
        start = reader.offset
        (name_len,) = reader.unpack("<H", "tensor name length")
        try:
            name = reader.take(name_len, "tensor name").decode("utf-8")
        except UnicodeDecodeError as e:
            raise CorruptModelError(f"bad tensor name: {e}", start) from e
        (ndim,) = reader.unpack("<B", f"{name} rank")
        shape = reader.unpack(f"<{ndim}I", f"{name} shape")
        count = int(np.prod(shape)) if ndim else 1
        raw = reader.take(count * TENSOR_DTYPE.itemsize, f"{name} data")
        params[name] = np.frombuffer(raw, dtype=TENSOR_DTYPE).reshape(shape).copy()

    network = Network(spec, rng=None)
    try:
        network.set_params(params)
    except ShapeMismatchError as e:
        raise CorruptModelError(f"tensors do not fit the architecture: {e}", len(data)) from e
    return Model(spec, network, header.get("provenance", {}))


def save_model(model: Model, path: Union[str, Path]):
    write_bytes_synced(path, dumps_model(model))


def load_model(path: Union[str, Path], input_dim: Optional[int] = None) -> Model:
    with open(path, "rb") as f:
        return loads_model(f.read(), input_dim)
