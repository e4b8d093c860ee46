from typing import Dict, Final

import numpy as np

BETA1: Final = 0.9
BETA2: Final = 0.999
EPSILON: Final = 1e-8


class AdamState(object):
    """First and second moment estimates, keyed like the parameters they track."""

    def __init__(self, params: Dict[str, np.ndarray]):
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def __str__(self):
        return f"AdamState[t={self.t}, tensors={len(self.m)}]"


def adam_step(params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray], state: AdamState, t: int,
              lr: float = 1e-3, beta1: float = BETA1, beta2: float = BETA2, eps: float = EPSILON):
    """
    One bias-corrected update applied in place to params, t counting from 1.
    """
    if t < 1:
        raise ValueError(f"step index must be at least 1, got {t}")
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    for name, w in params.items():
        g = grads[name]
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        m_hat = m / c1
        v_hat = v / c2
        w -= (lr * m_hat / (np.sqrt(v_hat) + eps)).astype(w.dtype)
    state.t = t
    return params, state


class Adam(object):

    def __init__(self, params: Dict[str, np.ndarray], lr: float = 1e-3, beta1: float = BETA1, beta2: float = BETA2,
                 eps: float = EPSILON):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.state = AdamState(params)

    def step(self, grads: Dict[str, np.ndarray]):
        adam_step(self.params, grads, self.state, self.state.t + 1, self.lr, self.beta1, self.beta2, self.eps)

    def __str__(self):
        return (f"Adam["
                f"lr={self.lr}, "
                f"betas=({self.beta1}, {self.beta2}), "
                f"eps={self.eps}, "
                f"t={self.state.t}"
                f"]")
