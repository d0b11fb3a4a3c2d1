"""The toy classifier being supervised: an MLP with tanh hidden layers,
per-sample softmax cross-entropy, optional dropout and weight decay."""

import numpy as np

from . import serialize
from .netcore import Dense, dropout_mask, softmax_xent_per_sample


class StudentNet:
    """MLP g_s(x, w): tanh hidden layers, identity logits layer of width
    equal to the class count. `theta0` is the base weight-decay coefficient
    (renormalized per batch by the trainer)."""

    def __init__(self, in_dim, hidden=(32, 32), classes=4, keep_prob=1.0,
                 theta0=0.0, rng=None):
        if not 0.0 < keep_prob <= 1.0:
            raise ValueError(f"keep_prob must be in (0, 1], got {keep_prob}")
        if theta0 < 0:
            raise ValueError("theta0 must be non-negative")
        self.in_dim = in_dim
        self.classes = classes
        self.keep_prob = keep_prob
        self.theta0 = theta0
        self.layers = []
        prev = in_dim
        for width in hidden:
            self.layers.append(Dense(prev, width, activation="tanh", rng=rng))
            prev = width
        self.layers.append(Dense(prev, classes, activation="identity", rng=rng))
        self._masks = None

    def forward(self, x, train_mode=False, rng=None):
        """Logits for a batch. Dropout masks hidden activations only in
        train_mode; eval mode is deterministic."""
        x = np.asarray(x, dtype=np.float64)
        masks = []
        out = x
        for layer in self.layers[:-1]:
            out = layer.forward(out)
            if train_mode and self.keep_prob < 1.0:
                if rng is None:
                    raise ValueError("dropout requires an rng in train_mode")
                mask = dropout_mask(out.shape, self.keep_prob, rng)
                out = out * mask
                masks.append(mask)
            else:
                masks.append(None)
        self._masks = masks
        return self.layers[-1].forward(out)

    def backward(self, dlogits):
        """Backprop dlogits through the whole net; returns (grads, dx)."""
        if self._masks is None:
            raise RuntimeError("student backward called before forward")
        grads = {}
        up = dlogits
        last = len(self.layers) - 1
        lg = self.layers[last].backward(up)
        for pname, g in lg.params.items():
            grads[f"layer{last}.{pname}"] = g
        up = lg.wrt_input
        for idx in reversed(range(last)):
            mask = self._masks[idx]
            if mask is not None:
                up = up * mask
            lg = self.layers[idx].backward(up)
            for pname, g in lg.params.items():
                grads[f"layer{idx}.{pname}"] = g
            up = lg.wrt_input
        return grads, up

    def params(self):
        out = {}
        for idx, layer in enumerate(self.layers):
            for pname, arr in layer.params().items():
                out[f"layer{idx}.{pname}"] = arr
        return out

    def l2_norm_sq(self):
        return float(sum(np.sum(a * a) for a in self.params().values()))

    def per_sample_losses(self, x, labels, train_mode=False, rng=None):
        logits = self.forward(x, train_mode=train_mode, rng=rng)
        return softmax_xent_per_sample(logits, labels)

    def save(self, path):
        serialize.write_arrays(path, serialize.STUDENT_MAGIC,
                               list(self.params().values()))

    def load(self, path):
        arrays = serialize.read_arrays(path, serialize.STUDENT_MAGIC)
        own = list(self.params().items())
        if len(arrays) != len(own):
            raise ValueError("checkpoint array count does not match this net")
        for (name, dst), src in zip(own, arrays):
            if dst.shape != src.shape:
                raise ValueError(f"shape mismatch for {name}: "
                                 f"{dst.shape} vs {src.shape}")
            dst[...] = src


def weighted_loss(per_sample_losses, weights, theta_t, l2_norm_sq=0.0):
    """Batch objective mean(v * loss) + theta_t * ||w||^2.

    The per-sample gradient of the data term scales each sample's loss
    gradient by its weight over the batch size; callers apply that scaling
    to dlogits before backprop.
    """
    losses = np.asarray(per_sample_losses, dtype=np.float64)
    v = np.asarray(weights, dtype=np.float64)
    if v.shape != losses.shape:
        raise ValueError("weights and losses must have the same shape")
    if np.any(v < 0) or np.any(v > 1):
        raise ValueError("weights must lie in [0, 1]")
    return float(np.mean(v * losses) + theta_t * l2_norm_sq)
