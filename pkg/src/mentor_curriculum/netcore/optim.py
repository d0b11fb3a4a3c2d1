"""Momentum SGD and Adam over named parameter dictionaries.

Optimizers mutate the parameter arrays in place. Slot buffers are keyed
by parameter name and created lazily on the first step; a step counter
tracks how many updates have been applied.
"""

import numpy as np


class MomentumSGD:
    """v <- momentum * v + g;  p <- p - lr * v."""

    def __init__(self, lr=0.1, momentum=0.9):
        self.lr = lr
        self.momentum = momentum
        self.velocity = {}
        self.steps = 0

    def step(self, params, grads, lr=None):
        lr = self.lr if lr is None else lr
        for name, p in params.items():
            g = grads[name]
            if g.shape != p.shape:
                raise ValueError(
                    f"gradient shape {g.shape} != parameter shape {p.shape} "
                    f"for {name!r}"
                )
            v = self.velocity.get(name)
            if v is None:
                v = np.zeros_like(p)
                self.velocity[name] = v
            v *= self.momentum
            v += g
            p -= lr * v
        self.steps += 1


class Adam:
    """Bias-corrected Adam (Kingma & Ba)."""

    def __init__(self, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = {}
        self.v = {}
        self.steps = 0

    def step(self, params, grads, lr=None):
        lr = self.lr if lr is None else lr
        self.steps += 1
        t = self.steps
        b1, b2 = self.beta1, self.beta2
        for name, p in params.items():
            g = grads[name]
            if g.shape != p.shape:
                raise ValueError(
                    f"gradient shape {g.shape} != parameter shape {p.shape} "
                    f"for {name!r}"
                )
            if name not in self.m:
                self.m[name] = np.zeros_like(p)
                self.v[name] = np.zeros_like(p)
            m = self.m[name]
            v = self.v[name]
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            m_hat = m / (1 - b1**t)
            v_hat = v / (1 - b2**t)
            p -= lr * m_hat / (np.sqrt(v_hat) + self.eps)
