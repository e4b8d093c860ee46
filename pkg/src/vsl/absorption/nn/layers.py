import math
from typing import Dict, Optional

import numpy as np
from scipy.special import expit

from vsl.absorption.model import ShapeMismatchError


class Layer(object):
    """A differentiable layer; forward caches what backward needs."""

    def __init__(self):
        self.params: Dict[str, np.ndarray] = {}
        self.grads: Dict[str, np.ndarray] = {}

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dy: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def zero_grad(self):
        for k, v in self.params.items():
            self.grads[k] = np.zeros_like(v)


def kaiming_uniform(rng: np.random.Generator, shape, fan_in: int, dtype) -> np.ndarray:
    bound = math.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


class Dense(Layer):
    """Fully connected layer; inputs with more than one feature axis are flattened."""

    def __init__(self, in_dim: int, out_dim: int, rng: Optional[np.random.Generator] = None, dtype=np.float32):
        super().__init__()
        self.in_dim = in_dim
        self.out_dim = out_dim
        if rng is None:
            self.params["weight"] = np.zeros((in_dim, out_dim), dtype=dtype)
        else:
            self.params["weight"] = kaiming_uniform(rng, (in_dim, out_dim), in_dim, dtype)
        self.params["bias"] = np.zeros(out_dim, dtype=dtype)
        self.zero_grad()
        self._x = None
        self._in_shape = None

    def forward(self, x):
        self._in_shape = x.shape
        x2 = x.reshape(x.shape[0], -1)
        if x2.shape[1] != self.in_dim:
            raise ShapeMismatchError(f"dense layer expects {self.in_dim} features, got {x2.shape[1]}")
        self._x = x2
        return x2 @ self.params["weight"] + self.params["bias"]

    def backward(self, dy):
        self.grads["weight"] = self._x.T @ dy
        self.grads["bias"] = dy.sum(axis=0)
        return (dy @ self.params["weight"].T).reshape(self._in_shape)


class Conv1d(Layer):
    """
    Stride-1 1-D convolution with zero 'same' padding.

    Weight shape (filters, in_channels, width); a (batch, length) input is one channel.
    """

    def __init__(self, in_channels: int, filters: int, width: int, rng: Optional[np.random.Generator] = None,
                 dtype=np.float32):
        super().__init__()
        if width % 2 != 1:
            raise ShapeMismatchError(f"convolution width must be odd, got {width}")
        self.in_channels = in_channels
        self.filters = filters
        self.width = width
        fan_in = in_channels * width
        if rng is None:
            self.params["weight"] = np.zeros((filters, in_channels, width), dtype=dtype)
        else:
            self.params["weight"] = kaiming_uniform(rng, (filters, in_channels, width), fan_in, dtype)
        self.params["bias"] = np.zeros(filters, dtype=dtype)
        self.zero_grad()
        self._xp = None
        self._squeeze = False

    def forward(self, x):
        self._squeeze = x.ndim == 2
        if self._squeeze:
            x = x[:, None, :]
        if x.ndim != 3 or x.shape[1] != self.in_channels:
            raise ShapeMismatchError(f"conv layer expects {self.in_channels} channels, got shape {x.shape}")
        n = x.shape[2]
        pad = self.width // 2
        self._xp = np.pad(x, ((0, 0), (0, 0), (pad, pad)))
        w = self.params["weight"]
        y = np.zeros((x.shape[0], self.filters, n), dtype=np.result_type(x, w))
        for k in range(self.width):
            y += np.matmul(w[:, :, k], self._xp[:, :, k:k + n])
        y += self.params["bias"][None, :, None]
        return y

    def backward(self, dy):
        w = self.params["weight"]
        n = dy.shape[2]
        pad = self.width // 2
        dw = np.empty_like(w)
        dxp = np.zeros_like(self._xp)
        for k in range(self.width):
            window = self._xp[:, :, k:k + n]
            dw[:, :, k] = np.tensordot(dy, window, axes=([0, 2], [0, 2]))
            dxp[:, :, k:k + n] += np.matmul(w[:, :, k].T, dy)
        self.grads["weight"] = dw
        self.grads["bias"] = dy.sum(axis=(0, 2))
        dx = dxp[:, :, pad:pad + n]
        return dx[:, 0, :] if self._squeeze else dx


class MaxPool1d(Layer):

    def __init__(self, width: int):
        super().__init__()
        self.width = width
        self._argmax = None
        self._shape = None

    def forward(self, x):
        squeeze = x.ndim == 2
        if squeeze:
            x = x[:, None, :]
        b, c, n = x.shape
        if n % self.width:
            raise ShapeMismatchError(f"pool width {self.width} does not divide length {n}")
        self._shape = (x.shape, squeeze)
        windows = x.reshape(b, c, n // self.width, self.width)
        self._argmax = np.argmax(windows, axis=3)
        y = np.take_along_axis(windows, self._argmax[..., None], axis=3)[..., 0]
        return y[:, 0, :] if squeeze else y

    def backward(self, dy):
        shape, squeeze = self._shape
        if squeeze:
            dy = dy[:, None, :]
        b, c, n = shape
        dwin = np.zeros((b, c, n // self.width, self.width), dtype=dy.dtype)
        np.put_along_axis(dwin, self._argmax[..., None], dy[..., None], axis=3)
        dx = dwin.reshape(b, c, n)
        return dx[:, 0, :] if squeeze else dx


class Elu(Layer):

    def forward(self, x):
        self._x = x
        self._y = np.where(x > 0, x, np.expm1(np.minimum(x, 0)))
        return self._y

    def backward(self, dy):
        return dy * np.where(self._x > 0, 1.0, self._y + 1.0).astype(dy.dtype)


class Sigmoid(Layer):

    def forward(self, x):
        self._y = expit(x)
        return self._y

    def backward(self, dy):
        return dy * self._y * (1.0 - self._y)


class Relu(Layer):

    def forward(self, x):
        self._mask = x > 0
        return np.where(self._mask, x, 0).astype(x.dtype)

    def backward(self, dy):
        return dy * self._mask


class Flatten(Layer):

    def forward(self, x):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dy):
        return dy.reshape(self._shape)
