"""Joint mini-batch training of the student and the per-sample weights.

Each step: compute per-sample losses and features, obtain weights (Bernoulli
burn-in, the weighting network, or a partial gradient step on stored weights
when a penalty form is given), renormalize the weight decay by the mean
weight, and take one optimizer step on the student. The weighting network
can be re-fit from a flagged clean subset at configured points of training.
"""

from dataclasses import dataclass, field

import numpy as np

from .curriculum import CurriculumParams, penalty_and_grad
from .data import LabeledDataset
from .mentornet import LossRecord, MentorNet, burn_in_weights, make_datadriven_labels, train_implicit
from .netcore import MomentumSGD, softmax_xent_per_sample, substream
from .student import StudentNet

CURRICULUM_MODES = ("none", "mentornet-dd", "explicit-g")

METRICS_COLUMNS = (
    "epoch", "step", "weighted_loss", "unweighted_loss", "val_acc",
    "mean_w_clean", "mean_w_corrupt", "grad_norm_sq", "lr", "theta_t",
)


def nearest_rank_percentile(values, pct):
    """p-th percentile by the nearest-rank rule: the ceil(p/100 * n)-th
    order statistic."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("empty batch")
    if not 0.0 < pct <= 100.0:
        raise ValueError("percentile must lie in (0, 100]")
    rank = int(np.ceil(pct / 100.0 * values.size))
    return float(np.sort(values)[rank - 1])


@dataclass
class MovingLossTracker:
    """Exponential moving average of the per-batch loss percentile."""

    decay: float = 0.95
    percentile: float = 75.0
    value: float = 0.0
    initialized: bool = False

    def __post_init__(self):
        if not 0.0 < self.decay < 1.0:
            raise ValueError("decay must lie in (0, 1)")
        if not 0.0 < self.percentile <= 100.0:
            raise ValueError("percentile must lie in (0, 100]")

    def update(self, batch_losses):
        q = nearest_rank_percentile(batch_losses, self.percentile)
        if self.initialized:
            self.value = self.decay * self.value + (1.0 - self.decay) * q
        else:
            self.value = q
            self.initialized = True
        return self.value


def renormalize_decay(theta0, weights):
    """Per-batch weight decay coefficient theta0 * mean(v)."""
    v = np.asarray(weights, dtype=np.float64)
    if v.size == 0:
        raise ValueError("empty weight batch")
    return float(theta0 * np.mean(v))


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 40
    batch_size: int = 128
    lr: float = 0.1
    lr_schedule: str = "step"          # 'step' decays by 0.1 at lr_decay_epochs
    lr_decay_epochs: tuple = ()        # ignored by the 'invsqrt' schedule
    momentum: float = 0.9
    curriculum_mode: str = "mentornet-dd"
    curriculum: CurriculumParams = None
    burn_in_fraction: float = 0.20
    burn_in_keep_prob: float = 0.75
    mentor_update_fracs: tuple = (0.21, 0.75)
    mentor_epochs: int = 200
    mentor_lr: float = 1e-3
    mentor_warm_start: bool = False
    dprime_fraction: float = 0.1
    window: int = 1
    theta0: float = 0.0
    student_hidden: tuple = (32, 32)
    student_keep_prob: float = 1.0
    sample_with_replacement: bool = False
    fix_label: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.curriculum_mode not in CURRICULUM_MODES:
            raise ValueError(f"unknown curriculum mode {self.curriculum_mode!r}")
        if self.lr_schedule not in ("step", "invsqrt"):
            raise ValueError(f"unknown lr schedule {self.lr_schedule!r}")
        if not 0.0 <= self.burn_in_fraction <= 1.0:
            raise ValueError("burn_in_fraction must lie in [0, 1]")
        if not 0.0 < self.burn_in_keep_prob <= 1.0:
            raise ValueError("burn_in_keep_prob must lie in (0, 1]")
        fr = self.mentor_update_fracs
        if any(not 0.0 < f < 1.0 for f in fr) or list(fr) != sorted(set(fr)):
            raise ValueError("mentor_update_fracs must be strictly increasing in (0, 1)")
        if sorted(set(self.lr_decay_epochs)) != list(self.lr_decay_epochs):
            raise ValueError("lr_decay_epochs must be strictly increasing")
        if not 0.0 < self.dprime_fraction <= 1.0:
            raise ValueError("dprime_fraction must lie in (0, 1]")
        if self.curriculum_mode == "explicit-g":
            if self.curriculum is None:
                raise ValueError("explicit-g mode needs curriculum parameters")
            penalty_and_grad(self.curriculum)  # must have a penalty form


@dataclass
class RunResult:
    student: StudentNet
    mentor: MentorNet
    metrics: list                      # one dict per epoch, append-only
    step_grad_norms: np.ndarray        # raw ||grad_w||^2 per step
    weights: np.ndarray                # final per-sample weights (train order)
    config: TrainConfig


def _lr_at(config, epoch, step):
    if config.lr_schedule == "invsqrt":
        return config.lr / np.sqrt(1.0 + step)
    drops = sum(1 for e in config.lr_decay_epochs if epoch >= e)
    return config.lr * (0.1**drops)


def run_spade(dataset: LabeledDataset, config: TrainConfig, weight_fn=None):
    """Train on the dataset's train split; returns nets, per-epoch metrics
    and the raw per-step gradient-norm trace.

    weight_fn, if given, replaces the weighting network in 'mentornet-dd'
    mode: called as weight_fn(losses, features) -> weights in [0, 1].
    """
    train_idx = dataset.train_indices()
    val_idx = dataset.val_indices()
    x_train = dataset.features[train_idx]
    y_train = dataset.observed[train_idx]
    clean_train = dataset.is_clean[train_idx]
    x_val = dataset.features[val_idx]
    y_val = dataset.observed[val_idx]
    n = train_idx.size

    shuffle_rng = substream(config.seed, "spade.shuffle")
    burn_rng = substream(config.seed, "spade.burnin")
    dropout_rng = substream(config.seed, "spade.dropout")
    mentor_init_rng = substream(config.seed, "spade.mentor-init")
    mentor_train_rng = substream(config.seed, "spade.mentor-train")

    student = StudentNet(
        in_dim=dataset.features.shape[1],
        hidden=config.student_hidden,
        classes=dataset.m,
        keep_prob=config.student_keep_prob,
        theta0=config.theta0,
        rng=substream(config.seed, "spade.student-init"),
    )
    mentor = MentorNet(dataset.m, rng=mentor_init_rng, fix_label=config.fix_label)
    optimizer = MomentumSGD(lr=config.lr, momentum=config.momentum)
    tracker = MovingLossTracker()
    record = LossRecord(n, window=config.window)
    v_store = np.ones(n)

    # the flagged subset used to re-fit the weighting network
    n_dprime = max(1, int(round(config.dprime_fraction * n)))
    dprime = substream(config.seed, "spade.dprime").permutation(n)[:n_dprime]

    update_epochs = {int(f * config.epochs) for f in config.mentor_update_fracs}
    burn_in_epochs = config.burn_in_fraction * config.epochs

    metrics = []
    step_grad_norms = []
    grad_norm_smooth = None
    step = 0
    epoch_weights = np.ones(n)

    for epoch in range(config.epochs):
        epoch_pct = int(100 * epoch / config.epochs)
        if (config.curriculum_mode == "mentornet-dd" and weight_fn is None
                and epoch in update_epochs and epoch > 0):
            feats, targets = make_datadriven_labels(
                x_train[dprime], y_train[dprime], clean_train[dprime],
                student, tracker.value, epoch_pct, window=config.window,
            )
            if not config.mentor_warm_start:
                mentor = MentorNet(dataset.m, rng=mentor_init_rng,
                                   fix_label=config.fix_label)
            train_implicit(feats, targets, mentor, config.mentor_epochs,
                           mentor_train_rng, lr=config.mentor_lr, loss="bce")

        if config.sample_with_replacement:
            order = shuffle_rng.integers(0, n, size=n)
        else:
            order = shuffle_rng.permutation(n)

        w_sum = u_sum = 0.0
        n_batches = 0
        lr = config.lr
        theta_t = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            x = x_train[idx]
            y = y_train[idx]
            logits = student.forward(x, train_mode=True,
                                     rng=dropout_rng if config.student_keep_prob < 1 else None)
            losses, dlogits = softmax_xent_per_sample(logits, y)
            if not np.all(np.isfinite(losses)):
                raise RuntimeError(
                    f"non-finite loss at epoch {epoch} step {step}: "
                    f"max |logit| = {np.abs(logits).max()}"
                )
            lpt = tracker.value if tracker.initialized \
                else nearest_rank_percentile(losses, tracker.percentile)
            record.record(idx, losses, lpt)

            lr = _lr_at(config, epoch, step)
            if epoch < burn_in_epochs and config.curriculum_mode != "none":
                v = burn_in_weights(burn_rng, config.burn_in_keep_prob, idx.size)
            elif config.curriculum_mode == "none":
                v = np.ones(idx.size)
            elif config.curriculum_mode == "mentornet-dd":
                feats = record.feature_batch(
                    idx, y, np.full(idx.size, epoch_pct, dtype=np.int64))
                v = weight_fn(losses, feats) if weight_fn is not None \
                    else mentor.forward(feats)
            else:  # explicit-g: one partial gradient step on the stored weights
                _, pgrad = penalty_and_grad(config.curriculum)
                v = v_store[idx] - lr * (losses + np.asarray(pgrad(v_store[idx])))
                v = np.clip(v, 0.0, 1.0)
                v_store[idx] = v
            epoch_weights[idx] = v

            theta_t = renormalize_decay(config.theta0, v)
            grads, _ = student.backward(dlogits * (v / idx.size)[:, None])
            gnorm = 0.0
            for name, p in student.params().items():
                g = grads[name]
                g += 2.0 * theta_t * p
                gnorm += float(np.sum(g * g))
            step_grad_norms.append(gnorm)
            grad_norm_smooth = gnorm if grad_norm_smooth is None \
                else 0.9 * grad_norm_smooth + 0.1 * gnorm
            optimizer.step(student.params(), grads, lr=lr)

            tracker.update(losses)
            w_sum += float(np.mean(v * losses))
            u_sum += float(np.mean(losses))
            n_batches += 1
            step += 1

        val_logits = student.forward(x_val, train_mode=False)
        val_acc = float(np.mean(val_logits.argmax(axis=1) == y_val))
        clean_w = epoch_weights[clean_train]
        corrupt_w = epoch_weights[~clean_train]
        metrics.append({
            "epoch": epoch,
            "step": step,
            "weighted_loss": w_sum / n_batches,
            "unweighted_loss": u_sum / n_batches,
            "val_acc": val_acc,
            "mean_w_clean": float(clean_w.mean()) if clean_w.size else 0.0,
            "mean_w_corrupt": float(corrupt_w.mean()) if corrupt_w.size else 0.0,
            "grad_norm_sq": grad_norm_smooth,
            "lr": lr,
            "theta_t": theta_t,
        })

    return RunResult(
        student=student,
        mentor=mentor,
        metrics=metrics,
        step_grad_norms=np.asarray(step_grad_norms),
        weights=epoch_weights,
        config=config,
    )


def format_metric(value):
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def write_metrics_csv(metrics, path, comment=None):
    """One row per logged epoch; loads back exactly (17 significant digits)."""
    with open(path, "w", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write(",".join(METRICS_COLUMNS) + "\n")
        for row in metrics:
            fh.write(",".join(format_metric(row[c]) for c in METRICS_COLUMNS) + "\n")


def read_metrics_csv(path):
    rows = []
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    body = [ln for ln in lines if not ln.startswith("#")]
    if not body or body[0].split(",") != list(METRICS_COLUMNS):
        raise ValueError(f"unexpected metrics header in {path}")
    for lineno, ln in enumerate(body[1:], start=2):
        parts = ln.split(",")
        if len(parts) != len(METRICS_COLUMNS):
            raise ValueError(f"{path}:{lineno}: expected "
                             f"{len(METRICS_COLUMNS)} fields, got {len(parts)}")
        row = {}
        for name, raw in zip(METRICS_COLUMNS, parts):
            row[name] = int(raw) if name in ("epoch", "step") else float(raw)
        rows.append(row)
    return rows
