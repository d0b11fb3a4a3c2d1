"""The learnable weighting network and its training regimes.

The network maps per-sample training signals (loss and loss-minus-moving-
average histories, label id, epoch percentage) to a weight in (0, 1): a
bidirectional LSTM encodes the history, two embeddings encode label and
epoch, and two dense layers (tanh, then sigmoid) produce the weight.

Two ways to fit it: regress directly onto target weights (implicit, MSE or
binary cross-entropy), or descend the weighted-loss-plus-penalty objective
through the network output (explicit).
"""

from dataclasses import dataclass

import numpy as np

from . import serialize
from .curriculum import CurriculumParams, curriculum_weight, penalty_and_grad
from .netcore import Adam, BiLSTM, Dense, Embedding, LSTMCell

EPOCH_VOCAB = 100  # epoch percentage is an integer in [0, 100)


@dataclass
class MentorFeatures:
    """Input signals for one sample; histories are oldest-first."""

    loss_history: np.ndarray
    loss_diff_history: np.ndarray
    label_id: int
    epoch_pct: int

    def __post_init__(self):
        self.loss_history = np.asarray(self.loss_history, dtype=np.float64)
        self.loss_diff_history = np.asarray(self.loss_diff_history, dtype=np.float64)
        if self.loss_history.shape != self.loss_diff_history.shape:
            raise ValueError("loss and diff histories must have equal length")
        if self.loss_history.ndim != 1 or self.loss_history.size < 1:
            raise ValueError("histories must be non-empty 1-d sequences")
        if not 0 <= self.epoch_pct < EPOCH_VOCAB:
            raise ValueError(f"epoch_pct must lie in [0, {EPOCH_VOCAB})")


@dataclass
class FeatureBatch:
    """Vectorized features: seq[b, T, 2] holds (loss, loss diff) pairs."""

    seq: np.ndarray
    labels: np.ndarray
    epochs: np.ndarray

    def __post_init__(self):
        self.seq = np.asarray(self.seq, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.epochs = np.asarray(self.epochs, dtype=np.int64)
        if self.seq.ndim != 3 or self.seq.shape[2] != 2:
            raise ValueError(f"seq must be (b, T, 2), got {self.seq.shape}")
        b = self.seq.shape[0]
        if self.labels.shape != (b,) or self.epochs.shape != (b,):
            raise ValueError("labels/epochs must be 1-d of the batch size")

    def __len__(self):
        return self.seq.shape[0]

    def take(self, indices):
        return FeatureBatch(self.seq[indices], self.labels[indices],
                            self.epochs[indices])

    @staticmethod
    def from_features(features):
        feats = list(features)
        if not feats:
            raise ValueError("empty feature list")
        seq = np.stack(
            [np.stack([f.loss_history, f.loss_diff_history], axis=1) for f in feats]
        )
        return FeatureBatch(
            seq,
            np.array([f.label_id for f in feats]),
            np.array([f.epoch_pct for f in feats]),
        )


@dataclass(frozen=True)
class BurnInConfig:
    """Bernoulli sample-dropout used during the first part of training."""

    fraction: float = 0.20
    keep_prob: float = 0.75

    def __post_init__(self):
        if not 0.0 <= self.fraction <= 1.0:
            raise ValueError("burn-in fraction must lie in [0, 1]")
        if not 0.0 < self.keep_prob <= 1.0:
            raise ValueError("burn-in keep_prob must lie in (0, 1]")


class LossRecord:
    """Per-sample ring buffer of the last `window` (loss, loss diff)
    observations. A row is back-filled with its first observation, which
    realizes the repeat-oldest padding rule for short histories."""

    def __init__(self, n_samples, window=1):
        if window < 1:
            raise ValueError("window must be >= 1")
        self.window = window
        self.loss_buf = np.zeros((n_samples, window))
        self.diff_buf = np.zeros((n_samples, window))
        self.count = np.zeros(n_samples, dtype=np.int64)

    def record(self, indices, losses, moving_avg):
        indices = np.asarray(indices)
        losses = np.asarray(losses, dtype=np.float64)
        diffs = losses - moving_avg
        fresh = self.count[indices] == 0
        lbuf = self.loss_buf[indices]
        dbuf = self.diff_buf[indices]
        lbuf[:, :-1] = lbuf[:, 1:]
        dbuf[:, :-1] = dbuf[:, 1:]
        lbuf[:, -1] = losses
        dbuf[:, -1] = diffs
        lbuf[fresh] = losses[fresh, None]
        dbuf[fresh] = diffs[fresh, None]
        self.loss_buf[indices] = lbuf
        self.diff_buf[indices] = dbuf
        self.count[indices] += 1

    def feature_batch(self, indices, labels, epochs):
        indices = np.asarray(indices)
        if np.any(self.count[indices] == 0):
            raise RuntimeError("no recorded loss for some requested samples")
        seq = np.stack([self.loss_buf[indices], self.diff_buf[indices]], axis=2)
        return FeatureBatch(seq, labels, epochs)


def featurize(record: LossRecord, index, label_id, epoch_pct) -> MentorFeatures:
    """Features for a single sample from its recorded loss history."""
    if record.count[index] == 0:
        raise RuntimeError(f"no recorded loss for sample {index}")
    return MentorFeatures(
        loss_history=record.loss_buf[index].copy(),
        loss_diff_history=record.diff_buf[index].copy(),
        label_id=int(label_id),
        epoch_pct=int(epoch_pct),
    )


def burn_in_weights(rng, keep_prob, size):
    """Bernoulli(keep_prob) weights in {0, 1} for `size` samples."""
    if not 0.0 < keep_prob <= 1.0:
        raise ValueError(f"keep_prob must be in (0, 1], got {keep_prob}")
    return (rng.random(size) < keep_prob).astype(np.float64)


class MentorNet:
    """bi-LSTM weighting network; output is sigmoid-bounded in (0, 1).

    With fix_label=True every label id is mapped to 0 before embedding,
    which lets a net trained on one task run on a task with a different
    class count.
    """

    def __init__(self, n_labels, rng, label_dim=2, epoch_dim=5, hidden=10,
                 fc1_dim=20, fix_label=False):
        self.n_labels = n_labels
        self.fix_label = fix_label
        self.label_emb = Embedding(n_labels, label_dim, rng=rng)
        self.epoch_emb = Embedding(EPOCH_VOCAB, epoch_dim, rng=rng)
        self.fwd_cell = LSTMCell(2, hidden, rng=rng)
        self.bwd_cell = LSTMCell(2, hidden, rng=rng)
        self.bilstm = BiLSTM(self.fwd_cell, self.bwd_cell)
        concat_dim = 2 * hidden + label_dim + epoch_dim
        self.fc1 = Dense(concat_dim, fc1_dim, activation="tanh", rng=rng)
        self.fc2 = Dense(fc1_dim, 1, activation="sigmoid", rng=rng)
        self._dims = (2 * hidden, label_dim, epoch_dim)

    def forward(self, batch: FeatureBatch):
        """Weights in (0, 1), one per sample."""
        labels = np.zeros_like(batch.labels) if self.fix_label else batch.labels
        enc = self.bilstm.encode(batch.seq)
        lab = self.label_emb.lookup(labels)
        epo = self.epoch_emb.lookup(batch.epochs)
        concat = np.concatenate([enc, lab, epo], axis=1)
        hidden = self.fc1.forward(concat)
        return self.fc2.forward(hidden)[:, 0]

    def backward(self, upstream, from_preactivation=False):
        """Backprop d loss / d output (or d loss / d fc2 preactivation)
        through every parameter; returns a grads dict keyed like params()."""
        up = np.asarray(upstream, dtype=np.float64)[:, None]
        g2 = self.fc2.backward(up, from_preactivation=from_preactivation)
        g1 = self.fc1.backward(g2.wrt_input)
        enc_dim, label_dim, _ = self._dims
        dconcat = g1.wrt_input
        denc = dconcat[:, :enc_dim]
        dlab = dconcat[:, enc_dim : enc_dim + label_dim]
        depo = dconcat[:, enc_dim + label_dim :]
        gb = self.bilstm.backward(denc)
        glab = self.label_emb.backward(dlab)
        gepo = self.epoch_emb.backward(depo)

        grads = {"label_emb.table": glab.params["table"],
                 "epoch_emb.table": gepo.params["table"]}
        for prefix, cell_grads in (("fwd", gb["fwd"]), ("bwd", gb["bwd"])):
            for name, arr in cell_grads.items():
                grads[f"{prefix}.{name}"] = arr
        for prefix, lg in (("fc1", g1), ("fc2", g2)):
            for name, arr in lg.params.items():
                grads[f"{prefix}.{name}"] = arr
        return grads

    def params(self):
        out = {"label_emb.table": self.label_emb.table,
               "epoch_emb.table": self.epoch_emb.table}
        for prefix, cell in (("fwd", self.fwd_cell), ("bwd", self.bwd_cell)):
            for name, arr in cell.params().items():
                out[f"{prefix}.{name}"] = arr
        for prefix, layer in (("fc1", self.fc1), ("fc2", self.fc2)):
            for name, arr in layer.params().items():
                out[f"{prefix}.{name}"] = arr
        return out

    def save(self, path):
        serialize.write_arrays(path, serialize.MENTOR_MAGIC,
                               list(self.params().values()))

    def load(self, path):
        arrays = serialize.read_arrays(path, serialize.MENTOR_MAGIC)
        own = list(self.params().items())
        if len(arrays) != len(own):
            raise ValueError("checkpoint array count does not match this net")
        for (name, dst), src in zip(own, arrays):
            if dst.shape != src.shape:
                raise ValueError(f"shape mismatch for {name}: "
                                 f"{dst.shape} vs {src.shape}")
            dst[...] = src


class MlpMentor:
    """Ablation network: the same inputs through a 2-layer perceptron,
    reading only the newest (loss, diff) pair instead of the full history."""

    def __init__(self, n_labels, rng, label_dim=2, epoch_dim=5, hidden=20,
                 fix_label=False):
        self.n_labels = n_labels
        self.fix_label = fix_label
        self.label_emb = Embedding(n_labels, label_dim, rng=rng)
        self.epoch_emb = Embedding(EPOCH_VOCAB, epoch_dim, rng=rng)
        in_dim = 2 + label_dim + epoch_dim
        self.fc1 = Dense(in_dim, hidden, activation="tanh", rng=rng)
        self.fc2 = Dense(hidden, 1, activation="sigmoid", rng=rng)
        self._dims = (label_dim, epoch_dim)

    def forward(self, batch: FeatureBatch):
        labels = np.zeros_like(batch.labels) if self.fix_label else batch.labels
        current = batch.seq[:, -1, :]
        lab = self.label_emb.lookup(labels)
        epo = self.epoch_emb.lookup(batch.epochs)
        concat = np.concatenate([current, lab, epo], axis=1)
        return self.fc2.forward(self.fc1.forward(concat))[:, 0]

    def backward(self, upstream, from_preactivation=False):
        up = np.asarray(upstream, dtype=np.float64)[:, None]
        g2 = self.fc2.backward(up, from_preactivation=from_preactivation)
        g1 = self.fc1.backward(g2.wrt_input)
        label_dim, _ = self._dims
        dlab = g1.wrt_input[:, 2 : 2 + label_dim]
        depo = g1.wrt_input[:, 2 + label_dim :]
        glab = self.label_emb.backward(dlab)
        gepo = self.epoch_emb.backward(depo)
        grads = {"label_emb.table": glab.params["table"],
                 "epoch_emb.table": gepo.params["table"]}
        for prefix, lg in (("fc1", g1), ("fc2", g2)):
            for name, arr in lg.params.items():
                grads[f"{prefix}.{name}"] = arr
        return grads

    def params(self):
        out = {"label_emb.table": self.label_emb.table,
               "epoch_emb.table": self.epoch_emb.table}
        for prefix, layer in (("fc1", self.fc1), ("fc2", self.fc2)):
            for name, arr in layer.params().items():
                out[f"{prefix}.{name}"] = arr
        return out


def generate_curriculum_dataset(curriculum, n_samples, rng, n_labels=4,
                                window=1, loss_range=(0.0, 10.0)):
    """Synthesize (features, target weight) pairs for regression.

    Losses and moving averages are drawn uniformly from loss_range, labels
    and epoch percentages uniformly from their vocabularies. `curriculum`
    is either a CurriculumParams or a callable (loss, epoch_pct) -> weight.
    Returns (FeatureBatch, targets).
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    lo, hi = loss_range
    loss = rng.uniform(lo, hi, size=n_samples)
    moving = rng.uniform(lo, hi, size=n_samples)
    labels = rng.integers(0, n_labels, size=n_samples)
    epochs = rng.integers(0, EPOCH_VOCAB, size=n_samples)
    if callable(curriculum):
        targets = np.asarray(curriculum(loss, epochs), dtype=np.float64)
    else:
        targets = np.asarray(curriculum_weight(curriculum, loss, epochs),
                             dtype=np.float64)
    pair = np.stack([loss, loss - moving], axis=1)
    seq = np.repeat(pair[:, None, :], window, axis=1)
    return FeatureBatch(seq, labels, epochs), targets


def _holdout_split(n, holdout, rng):
    order = rng.permutation(n)
    n_hold = int(round(n * holdout))
    if n > 1:
        n_hold = min(max(n_hold, 1), n - 1)
    else:
        n_hold = 0
    return order[n_hold:], order[:n_hold]


def _heldout_loss(net, batch, targets, kind):
    v = net.forward(batch)
    if kind == "mse":
        return float(np.mean((v - targets) ** 2))
    vc = np.clip(v, 1e-12, 1.0 - 1e-12)
    return float(np.mean(-targets * np.log(vc) - (1 - targets) * np.log(1 - vc)))


def train_implicit(batch: FeatureBatch, targets, net, epochs, rng,
                   batch_size=128, lr=1e-3, holdout=0.1, loss="mse",
                   lr_decay_frac=0.75):
    """Fit the network output directly to target weights.

    loss='mse' regresses onto real-valued targets; loss='bce' treats binary
    targets with cross-entropy. The learning rate drops by 10x at
    lr_decay_frac of the epoch budget, which damps late-training jitter.
    Returns the per-epoch held-out loss curve (empty for zero epochs).
    Raises if training diverges to non-finite.
    """
    if loss not in ("mse", "bce"):
        raise ValueError(f"unknown loss {loss!r}")
    targets = np.asarray(targets, dtype=np.float64)
    if len(batch) == 0:
        raise ValueError("empty training set")
    train_idx, hold_idx = _holdout_split(len(batch), holdout, rng)
    hold_batch = batch.take(hold_idx) if hold_idx.size else batch.take(train_idx)
    hold_targets = targets[hold_idx] if hold_idx.size else targets[train_idx]

    opt = Adam(lr=lr)
    history = []
    decay_at = int(lr_decay_frac * epochs)
    for epoch in range(epochs):
        lr_t = lr * (0.1 if epoch >= decay_at else 1.0)
        order = train_idx[rng.permutation(train_idx.size)]
        for start in range(0, order.size, batch_size):
            idx = order[start : start + batch_size]
            sub = batch.take(idx)
            t = targets[idx]
            v = net.forward(sub)
            b = idx.size
            if loss == "mse":
                grads = net.backward(2.0 * (v - t) / b)
            else:
                # d BCE / d logit = (v - t) / b, fused through the sigmoid
                grads = net.backward((v - t) / b, from_preactivation=True)
            opt.step(net.params(), grads, lr=lr_t)
        score = _heldout_loss(net, hold_batch, hold_targets, loss)
        if not np.isfinite(score):
            raise RuntimeError(
                f"implicit training diverged at epoch {epoch}: held-out "
                f"{loss} = {score}"
            )
        history.append(score)
    return history


def train_explicit(batch: FeatureBatch, losses, params: CurriculumParams, net,
                   epochs, rng, batch_size=128, lr=1e-3, holdout=0.1):
    """Descend sum_i v_i * loss_i + G(v_i) through the network output.

    Requires a curriculum whose penalty G has a differentiable form.
    Returns the per-epoch held-out objective curve.
    """
    penalty, penalty_grad = penalty_and_grad(params)
    losses = np.asarray(losses, dtype=np.float64)
    if len(batch) == 0:
        raise ValueError("empty training set")
    train_idx, hold_idx = _holdout_split(len(batch), holdout, rng)
    hold_batch = batch.take(hold_idx) if hold_idx.size else batch.take(train_idx)
    hold_losses = losses[hold_idx] if hold_idx.size else losses[train_idx]

    opt = Adam(lr=lr)
    history = []
    for epoch in range(epochs):
        order = train_idx[rng.permutation(train_idx.size)]
        for start in range(0, order.size, batch_size):
            idx = order[start : start + batch_size]
            sub = batch.take(idx)
            v = net.forward(sub)
            dv = (losses[idx] + np.asarray(penalty_grad(v))) / idx.size
            grads = net.backward(dv)
            opt.step(net.params(), grads)
        v = net.forward(hold_batch)
        score = float(np.mean(v * hold_losses + np.asarray(penalty(v))))
        if not np.isfinite(score):
            raise RuntimeError(
                f"explicit training diverged at epoch {epoch}: objective {score}"
            )
        history.append(score)
    return history


def make_datadriven_labels(x, labels, clean_flags, student, moving_avg,
                           epoch_pct, window=1):
    """Build the (features, binary target) set for the data-driven update.

    Features come from the student's current per-sample losses on the
    flagged subset; the target is 1 exactly where the observed label is
    correct. Fit with train_implicit(..., loss='bce').
    """
    x = np.asarray(x, dtype=np.float64)
    labels = np.asarray(labels)
    clean_flags = np.asarray(clean_flags, dtype=bool)
    if x.shape[0] == 0:
        raise ValueError("empty clean subset")
    losses, _ = student.per_sample_losses(x, labels, train_mode=False)
    pair = np.stack([losses, losses - moving_avg], axis=1)
    seq = np.repeat(pair[:, None, :], window, axis=1)
    epochs = np.full(len(labels), int(epoch_pct), dtype=np.int64)
    return FeatureBatch(seq, labels, epochs), clean_flags.astype(np.float64)
