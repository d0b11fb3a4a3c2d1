"""Dense / embedding / LSTM building blocks with hand-coded backward passes.

Everything operates on 64-bit numpy arrays. Each layer caches what its
backward pass needs during forward; backward returns gradients for every
parameter plus the gradient with respect to the layer input. All backward
passes are validated against central finite differences in the test suite.
"""

from dataclasses import dataclass

import numpy as np


def sigmoid(x):
    # evaluated in a numerically stable split to avoid overflow warnings
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


_ACTIVATIONS = {
    "identity": (lambda z: z, lambda out: np.ones_like(out)),
    "tanh": (np.tanh, lambda out: 1.0 - out * out),
    "sigmoid": (sigmoid, lambda out: out * (1.0 - out)),
}


def glorot_uniform(rng, shape, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


@dataclass
class LayerGrads:
    """Per-parameter gradients (same shapes as the parameters) plus the
    gradient w.r.t. the layer input."""

    params: dict
    wrt_input: np.ndarray


class Dense:
    """Fully connected layer: out = activation(x @ weights + bias)."""

    def __init__(self, in_dim, out_dim, activation="identity", rng=None):
        if activation not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.activation = activation
        if rng is None:
            self.weights = np.zeros((in_dim, out_dim))
        else:
            self.weights = glorot_uniform(rng, (in_dim, out_dim), in_dim, out_dim)
        self.bias = np.zeros(out_dim)
        self._cache = None

    def forward(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ValueError(
                f"dense expects input of shape (b, {self.in_dim}), got {x.shape}"
            )
        act, _ = _ACTIVATIONS[self.activation]
        out = act(x @ self.weights + self.bias)
        self._cache = (x, out)
        return out

    def backward(self, upstream, from_preactivation=False):
        """Chain `upstream` (d loss / d out) back through the layer.

        With from_preactivation=True the caller supplies d loss / d z for
        z = x@W + b directly, bypassing the activation derivative (used for
        fused sigmoid + cross-entropy gradients).
        """
        if self._cache is None:
            raise RuntimeError("dense backward called before forward")
        x, out = self._cache
        upstream = np.asarray(upstream, dtype=np.float64)
        if upstream.shape != out.shape:
            raise ValueError(
                f"upstream grad shape {upstream.shape} != output shape {out.shape}"
            )
        if from_preactivation:
            dpre = upstream
        else:
            _, deriv = _ACTIVATIONS[self.activation]
            dpre = upstream * deriv(out)
        return LayerGrads(
            params={"weights": x.T @ dpre, "bias": dpre.sum(axis=0)},
            wrt_input=dpre @ self.weights.T,
        )

    def params(self):
        return {"weights": self.weights, "bias": self.bias}


class Embedding:
    """Integer id -> learned row of a (vocab x dim) table."""

    def __init__(self, vocab, dim, rng=None):
        self.vocab = vocab
        self.dim = dim
        if rng is None:
            self.table = np.zeros((vocab, dim))
        else:
            self.table = rng.uniform(-0.05, 0.05, size=(vocab, dim))
        self._indices = None

    def lookup(self, indices):
        indices = np.asarray(indices)
        if indices.size and (indices.min() < 0 or indices.max() >= self.vocab):
            raise IndexError(
                f"embedding index out of range [0, {self.vocab}): "
                f"min={indices.min()}, max={indices.max()}"
            )
        self._indices = indices
        return self.table[indices]

    def backward(self, upstream):
        """Gradient flows only into the looked-up rows."""
        if self._indices is None:
            raise RuntimeError("embedding backward called before lookup")
        grad = np.zeros_like(self.table)
        np.add.at(grad, self._indices, upstream)
        return LayerGrads(params={"table": grad}, wrt_input=None)

    def params(self):
        return {"table": self.table}


class LSTMCell:
    """Standard LSTM cell (sigmoid gates, tanh candidate, no peepholes).

    Each gate has one weight matrix acting on concat(x, h_prev) and one
    bias, giving 8 parameter arrays: Wi,bi (input gate), Wf,bf (forget),
    Wc,bc (candidate), Wo,bo (output).
    """

    GATES = ("i", "f", "c", "o")

    def __init__(self, input_dim, hidden_dim, rng=None):
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        z_dim = input_dim + hidden_dim
        for g in self.GATES:
            if rng is None:
                w = np.zeros((z_dim, hidden_dim))
            else:
                w = glorot_uniform(rng, (z_dim, hidden_dim), z_dim, hidden_dim)
            setattr(self, f"W{g}", w)
            setattr(self, f"b{g}", np.zeros(hidden_dim))

    def step(self, x, h_prev, c_prev):
        """One recurrence step; returns (h, c, cache)."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise ValueError(
                f"lstm expects input of shape (b, {self.input_dim}), got {x.shape}"
            )
        if h_prev.shape != (x.shape[0], self.hidden_dim):
            raise ValueError(
                f"hidden state shape {h_prev.shape} incompatible with "
                f"(b={x.shape[0]}, hidden={self.hidden_dim})"
            )
        z = np.concatenate([x, h_prev], axis=1)
        i = sigmoid(z @ self.Wi + self.bi)
        f = sigmoid(z @ self.Wf + self.bf)
        g = np.tanh(z @ self.Wc + self.bc)
        o = sigmoid(z @ self.Wo + self.bo)
        c = f * c_prev + i * g
        tc = np.tanh(c)
        h = o * tc
        cache = (z, c_prev, i, f, g, o, tc)
        return h, c, cache

    def step_backward(self, cache, dh, dc, grads):
        """Backward through one step, accumulating into `grads`.

        Returns (dx, dh_prev, dc_prev). `grads` maps parameter names to
        arrays (see zero_grads) and is mutated in place so that a sequence
        of steps accumulates naturally.
        """
        z, c_prev, i, f, g, o, tc = cache
        do = dh * tc
        dc_total = dc + dh * o * (1.0 - tc * tc)
        di = dc_total * g
        dg = dc_total * i
        df = dc_total * c_prev
        dc_prev = dc_total * f

        dz_pre = {
            "i": di * i * (1.0 - i),
            "f": df * f * (1.0 - f),
            "c": dg * (1.0 - g * g),
            "o": do * o * (1.0 - o),
        }
        dz = np.zeros_like(z)
        for gate, dpre in dz_pre.items():
            grads[f"W{gate}"] += z.T @ dpre
            grads[f"b{gate}"] += dpre.sum(axis=0)
            dz += dpre @ getattr(self, f"W{gate}").T
        dx = dz[:, : self.input_dim]
        dh_prev = dz[:, self.input_dim :]
        return dx, dh_prev, dc_prev

    def zero_grads(self):
        return {name: np.zeros_like(arr) for name, arr in self.params().items()}

    def params(self):
        out = {}
        for g in self.GATES:
            out[f"W{g}"] = getattr(self, f"W{g}")
            out[f"b{g}"] = getattr(self, f"b{g}")
        return out


class BiLSTM:
    """Bidirectional encoder: run one cell left-to-right and one
    right-to-left over a sequence, concatenate the two final hidden states.
    """

    def __init__(self, forward_cell: LSTMCell, backward_cell: LSTMCell):
        if forward_cell.hidden_dim != backward_cell.hidden_dim:
            raise ValueError("forward/backward cells must share hidden size")
        self.fwd = forward_cell
        self.bwd = backward_cell
        self._cache = None

    def encode(self, seq):
        """seq: (b, T, input_dim) -> (b, 2*hidden_dim)."""
        seq = np.asarray(seq, dtype=np.float64)
        if seq.ndim != 3:
            raise ValueError(f"sequence must be (b, T, d), got shape {seq.shape}")
        b, T, _ = seq.shape
        if T < 1:
            raise ValueError("empty sequence")
        hid = self.fwd.hidden_dim

        caches_f, caches_b = [], []
        h = np.zeros((b, hid))
        c = np.zeros((b, hid))
        for t in range(T):
            h, c, cache = self.fwd.step(seq[:, t, :], h, c)
            caches_f.append(cache)
        h_fwd = h

        h = np.zeros((b, hid))
        c = np.zeros((b, hid))
        for t in reversed(range(T)):
            h, c, cache = self.bwd.step(seq[:, t, :], h, c)
            caches_b.append(cache)  # in processing order: t = T-1 .. 0
        h_bwd = h

        self._cache = (seq.shape, caches_f, caches_b)
        return np.concatenate([h_fwd, h_bwd], axis=1)

    def backward(self, upstream):
        """upstream: (b, 2*hidden) -> dict with 'fwd'/'bwd' param grads and
        'seq' gradient of shape (b, T, input_dim)."""
        if self._cache is None:
            raise RuntimeError("bilstm backward called before encode")
        shape, caches_f, caches_b = self._cache
        b, T, d = shape
        hid = self.fwd.hidden_dim
        upstream = np.asarray(upstream, dtype=np.float64)
        if upstream.shape != (b, 2 * hid):
            raise ValueError(
                f"upstream shape {upstream.shape} != ({b}, {2 * hid})"
            )
        dseq = np.zeros(shape)

        grads_f = self.fwd.zero_grads()
        dh = upstream[:, :hid].copy()
        dc = np.zeros((b, hid))
        for t in reversed(range(T)):
            dx, dh, dc = self.fwd.step_backward(caches_f[t], dh, dc, grads_f)
            dseq[:, t, :] += dx

        grads_b = self.bwd.zero_grads()
        dh = upstream[:, hid:].copy()
        dc = np.zeros((b, hid))
        # caches_b[k] processed element t = T-1-k; walk them newest-first
        for k in reversed(range(T)):
            dx, dh, dc = self.bwd.step_backward(caches_b[k], dh, dc, grads_b)
            dseq[:, T - 1 - k, :] += dx

        return {"fwd": grads_f, "bwd": grads_b, "seq": dseq}


def softmax_xent_per_sample(logits, labels):
    """Per-sample softmax cross-entropy.

    Returns (losses, dlogits) where losses[i] = -log softmax(logits[i])[labels[i]]
    and dlogits[i] = softmax(logits[i]) - onehot(labels[i]) is the gradient of
    losses[i] alone (no batch averaging).
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels)
    if logits.ndim != 2:
        raise ValueError(f"logits must be (b, m), got {logits.shape}")
    b, m = logits.shape
    if labels.shape != (b,):
        raise ValueError(f"labels must have shape ({b},), got {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= m):
        raise IndexError(f"labels must lie in [0, {m})")
    shifted = logits - logits.max(axis=1, keepdims=True)
    logz = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    logp = shifted - logz
    rows = np.arange(b)
    losses = -logp[rows, labels]
    dlogits = np.exp(logp)
    dlogits[rows, labels] -= 1.0
    return losses, dlogits


def dropout_mask(shape, keep_prob, rng):
    """Inverted-dropout mask: entries are 1/keep_prob with probability
    keep_prob, else 0."""
    if not 0.0 < keep_prob <= 1.0:
        raise ValueError(f"keep_prob must be in (0, 1], got {keep_prob}")
    if keep_prob == 1.0:
        return np.ones(shape)
    return (rng.random(shape) < keep_prob) / keep_prob
