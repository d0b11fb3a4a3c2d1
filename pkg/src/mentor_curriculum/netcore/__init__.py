"""Minimal deterministic differentiable-computation substrate."""

from .gradcheck import FD_STEP, grad_check, max_relative_error, numeric_gradient, worst_error
from .layers import (
    BiLSTM,
    Dense,
    Embedding,
    LayerGrads,
    LSTMCell,
    dropout_mask,
    glorot_uniform,
    sigmoid,
    softmax_xent_per_sample,
)
from .optim import Adam, MomentumSGD
from .rng import substream

__all__ = [
    "Adam",
    "BiLSTM",
    "Dense",
    "Embedding",
    "FD_STEP",
    "LSTMCell",
    "LayerGrads",
    "MomentumSGD",
    "dropout_mask",
    "glorot_uniform",
    "grad_check",
    "max_relative_error",
    "numeric_gradient",
    "sigmoid",
    "softmax_xent_per_sample",
    "substream",
    "worst_error",
]
