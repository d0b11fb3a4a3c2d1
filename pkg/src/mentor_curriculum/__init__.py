"""Curriculum-weighted training on corrupted labels.

A numpy library implementing closed-form sample-weighting rules and their
underlying robust objectives, a learnable bi-LSTM weighting network, a toy
student classifier, synthetic corrupted-label datasets, and the joint
mini-batch training loop that ties them together, plus numerical
verification suites for all of it.
"""

__version__ = "0.1.0"

from .curriculum import (
    CurriculumParams,
    RobustPenaltySpec,
    brute_force_weight,
    curriculum_weight,
    focal_weight,
    g_penalty,
    hard_negative_weight,
    linear_weight,
    predefined_weight,
    rho_from_weighting,
    robust_penalty_value,
    robust_penalty_weight,
    spl_weight,
    temporal_mixture_weight,
    underlying_objective,
)
from .data import CorruptionSpec, DatasetSpec, LabeledDataset, corrupt_labels, make_synthetic
from .mentornet import (
    BurnInConfig,
    FeatureBatch,
    MentorFeatures,
    MentorNet,
    MlpMentor,
    burn_in_weights,
    featurize,
    generate_curriculum_dataset,
    make_datadriven_labels,
    train_explicit,
    train_implicit,
)
from .spade import (
    MovingLossTracker,
    RunResult,
    TrainConfig,
    nearest_rank_percentile,
    renormalize_decay,
    run_spade,
    write_metrics_csv,
)
from .student import StudentNet, weighted_loss
