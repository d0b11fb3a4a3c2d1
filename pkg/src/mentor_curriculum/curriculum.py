"""Closed-form sample-weighting curricula and their underlying robust objectives.

Each weighting rule maps a non-negative per-sample loss to a weight in
[0, 1]. The module also carries two independent numerical oracles used to
verify the closed forms: a dense grid minimizer for argmin_v v*loss + G(v)
and adaptive quadrature for the implied penalty integral.
"""

from dataclasses import dataclass

import numpy as np

from .integrate import adaptive_simpson

CURRICULUM_KINDS = (
    "self-paced",
    "predefined-l1l2",
    "focal",
    "hard-negative",
    "linear",
    "temporal-mixture",
)

PENALTY_KINDS = ("huber", "log-sum", "lorentzian", "mcp")

GRID_STEP = 1e-4  # brute-force oracle resolution; bounds its error at half a step


@dataclass(frozen=True)
class CurriculumParams:
    """Parameters selecting and shaping one weighting rule.

    lam1/lam2 drive the clamped-ramp rule, gamma the focal rule, lam the
    single-threshold rules, switch_pct the epoch percentage at which the
    temporal mixture flips from easy-first to hard-first.
    """

    kind: str
    lam1: float = 1.0
    lam2: float = 1.0
    gamma: float = 1.0
    lam: float = 1.0
    switch_pct: int = 50

    def __post_init__(self):
        if self.kind not in CURRICULUM_KINDS:
            raise ValueError(f"unknown curriculum kind {self.kind!r}")
        if self.lam1 < 0 or self.lam2 < 0 or self.lam < 0:
            raise ValueError("lam1, lam2 and lam must be non-negative")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if not 0 <= self.switch_pct < 100:
            raise ValueError("switch_pct must lie in [0, 100)")


@dataclass(frozen=True)
class RobustPenaltySpec:
    """Scale parameters of the classical robust penalties."""

    kind: str
    lam: float = 1.0
    eps: float = 1.0
    delta: float = 1.0

    def __post_init__(self):
        if self.kind not in PENALTY_KINDS:
            raise ValueError(f"unknown penalty kind {self.kind!r}")
        if self.lam <= 0 or self.eps <= 0 or self.delta <= 0:
            raise ValueError("penalty scale parameters must be positive")


def _as_loss(loss):
    arr = np.asarray(loss, dtype=np.float64)
    if np.any(arr < 0):
        raise ValueError("loss must be non-negative")
    return arr, arr.ndim == 0


def _ret(out, scalar):
    return float(out) if scalar else out


def spl_weight(loss, lam):
    """Self-paced rule: select iff loss <= lam (boundary inclusive)."""
    if lam < 0:
        raise ValueError("lam must be non-negative")
    arr, scalar = _as_loss(loss)
    return _ret((arr <= lam).astype(np.float64), scalar)


def predefined_weight(loss, lam1, lam2):
    """Clamped linear ramp: 1 up to lam1, 0 beyond lam1 + lam2.

    With lam2 = 0 the ramp degenerates to the indicator loss <= lam1.
    """
    if lam1 < 0 or lam2 < 0:
        raise ValueError("lam1 and lam2 must be non-negative")
    arr, scalar = _as_loss(loss)
    if lam2 == 0:
        return _ret((arr <= lam1).astype(np.float64), scalar)
    return _ret(np.clip(1.0 - (arr - lam1) / lam2, 0.0, 1.0), scalar)


def focal_weight(loss, gamma):
    """(1 - exp(-loss)) ** gamma; emphasizes high-loss samples."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    arr, scalar = _as_loss(loss)
    return _ret((-np.expm1(-arr)) ** gamma, scalar)


def hard_negative_weight(loss, lam):
    """Select only hard samples: weight 1 iff loss >= lam."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    arr, scalar = _as_loss(loss)
    return _ret((arr >= lam).astype(np.float64), scalar)


def linear_weight(loss, lam):
    """Linear down-weighting: clamp(1 - loss/lam, 0, 1)."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    arr, scalar = _as_loss(loss)
    return _ret(np.clip(1.0 - arr / lam, 0.0, 1.0), scalar)


def temporal_mixture_weight(loss, lam, epoch_pct, switch_pct=50):
    """Self-paced before switch_pct of training, hard-negative from it on."""
    ep = np.asarray(epoch_pct)
    if ep.ndim == 0:
        if int(ep) < switch_pct:
            return spl_weight(loss, lam)
        return hard_negative_weight(loss, lam)
    easy = np.asarray(spl_weight(loss, lam), dtype=np.float64)
    hard = np.asarray(hard_negative_weight(loss, lam), dtype=np.float64)
    return np.where(ep < switch_pct, easy, hard)


def curriculum_weight(params: CurriculumParams, loss, epoch_pct=0):
    """Evaluate the rule selected by `params` (vectorized over loss)."""
    if params.kind == "self-paced":
        return spl_weight(loss, params.lam)
    if params.kind == "predefined-l1l2":
        return predefined_weight(loss, params.lam1, params.lam2)
    if params.kind == "focal":
        return focal_weight(loss, params.gamma)
    if params.kind == "hard-negative":
        return hard_negative_weight(loss, params.lam)
    if params.kind == "linear":
        return linear_weight(loss, params.lam)
    return temporal_mixture_weight(loss, params.lam, epoch_pct, params.switch_pct)


def g_penalty(v, lam1, lam2):
    """Per-sample penalty 0.5*lam2*v^2 - (lam1 + lam2)*v for v in [0, 1]."""
    arr = np.asarray(v, dtype=np.float64)
    if np.any(arr < 0) or np.any(arr > 1):
        raise ValueError("v must lie in [0, 1]")
    out = 0.5 * lam2 * arr * arr - (lam1 + lam2) * arr
    return float(out) if arr.ndim == 0 else out


def g_penalty_grad(v, lam1, lam2):
    """d g_penalty / d v = lam2*v - (lam1 + lam2)."""
    arr = np.asarray(v, dtype=np.float64)
    out = lam2 * arr - (lam1 + lam2)
    return float(out) if arr.ndim == 0 else out


def penalty_and_grad(params: CurriculumParams):
    """Return (G, dG/dv) callables for curricula with a known penalty form.

    Only the self-paced rule (G = -lam*v) and the clamped ramp have one.
    """
    if params.kind == "self-paced":
        return (lambda v: -params.lam * np.asarray(v, dtype=np.float64),
                lambda v: np.full_like(np.asarray(v, dtype=np.float64), -params.lam))
    if params.kind == "predefined-l1l2":
        return (lambda v: g_penalty(v, params.lam1, params.lam2),
                lambda v: g_penalty_grad(v, params.lam1, params.lam2))
    raise ValueError(f"no penalty form available for kind {params.kind!r}")


def brute_force_weight(loss, penalty_fn, step=GRID_STEP):
    """Independent oracle: grid-minimize v*loss + penalty_fn(v) over [0, 1].

    Ties resolve to the smallest v (first minimum on the grid).
    """
    arr, scalar = _as_loss(loss)
    grid = np.linspace(0.0, 1.0, round(1.0 / step) + 1)
    pen = np.asarray(penalty_fn(grid), dtype=np.float64)
    if not np.all(np.isfinite(pen)):
        raise ValueError("penalty function returned non-finite values")
    objective = np.outer(arr.reshape(-1), grid) + pen
    best = grid[np.argmin(objective, axis=1)]
    return _ret(best.reshape(arr.shape) if not scalar else best[0], scalar)


def underlying_objective(loss, lam1, lam2):
    """Value of the robust objective implied by the clamped-ramp rule.

    Identity below lam1, a concave quadratic blend in the ramp region,
    constant (lam2 + 2*lam1)/2 beyond lam1 + lam2. With lam2 = 0 it
    degenerates to min(loss, lam1).
    """
    if lam1 < 0 or lam2 < 0:
        raise ValueError("lam1 and lam2 must be non-negative")
    arr, scalar = _as_loss(loss)
    if lam2 == 0:
        return _ret(np.minimum(arr, lam1), scalar)
    theta = (lam1 + lam2) / lam2
    mid = theta * arr - arr * arr / (2.0 * lam2) - (theta - 1.0) ** 2 * lam2 / 2.0
    out = np.where(
        arr <= lam1, arr, np.where(arr >= lam1 + lam2, (lam2 + 2.0 * lam1) / 2.0, mid)
    )
    return _ret(out, scalar)


def rho_from_weighting(weight_fn, loss, tol=1e-8, max_depth=30):
    """Penalty implied by an arbitrary weighting rule: integral of the
    weight from 0 to `loss` by adaptive Simpson quadrature.

    The rule must produce values in [0, 1]; anything else breaks the
    weight-function contract and raises.
    """
    arr, scalar = _as_loss(loss)
    if arr.ndim != 0:
        return np.array([rho_from_weighting(weight_fn, x, tol, max_depth) for x in arr])

    def checked(x):
        w = float(weight_fn(x))
        if not 0.0 <= w <= 1.0:
            raise ValueError(
                f"weight function returned {w} at loss {x}; must lie in [0, 1]"
            )
        return w

    return adaptive_simpson(checked, 0.0, float(arr), tol=tol, max_depth=max_depth)


def robust_penalty_weight(spec: RobustPenaltySpec, loss):
    """Weighting rule of the classical penalty named by `spec`.

    The raw log-sum and Lorentzian rules exceed 1 at small losses for small
    scale parameters; weights are clamped to 1 there so the output stays a
    valid sample weight.
    """
    arr, scalar = _as_loss(loss)
    if spec.kind == "huber":
        lam2 = spec.lam * spec.lam
        safe = np.where(arr > 0, arr, 1.0)
        out = np.where(arr <= lam2, 0.5, spec.lam / (2.0 * np.sqrt(safe)))
    elif spec.kind == "log-sum":
        out = np.minimum(spec.lam / (arr + spec.eps), 1.0)
    elif spec.kind == "lorentzian":
        out = np.minimum(2.0 * arr / (2.0 * spec.delta**2 + arr * arr), 1.0)
    else:  # mcp
        out = np.clip(1.0 - arr / spec.lam, 0.0, 1.0)
    return _ret(out, scalar)


def robust_penalty_value(spec: RobustPenaltySpec, loss):
    """Closed-form penalty value matching robust_penalty_weight's rule."""
    arr, scalar = _as_loss(loss)
    if spec.kind == "huber":
        lam2 = spec.lam * spec.lam
        out = np.where(
            arr <= lam2, 0.5 * arr, spec.lam * (np.sqrt(np.maximum(arr, lam2)) - 0.5 * spec.lam)
        )
    elif spec.kind == "log-sum":
        out = spec.lam * np.log1p(arr / spec.eps)
    elif spec.kind == "lorentzian":
        out = np.log1p(0.5 * (arr / spec.delta) ** 2)
    else:  # mcp
        out = np.where(arr < spec.lam, arr - arr * arr / (2.0 * spec.lam), spec.lam / 2.0)
    return _ret(out, scalar)
