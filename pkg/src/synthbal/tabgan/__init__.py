from .gan import (
    FidelityReport,
    GanConfig,
    GanModel,
    fidelity_report,
    sample_synthetic,
    train_gan,
)
from .mlp import AdamState, MlpParams, adam_step, init_mlp, mlp_backward, mlp_forward
from .transform import CopulaTransform, Standardizer, fit_transform, invert_transform

__all__ = [
    "AdamState",
    "CopulaTransform",
    "FidelityReport",
    "GanConfig",
    "GanModel",
    "MlpParams",
    "Standardizer",
    "adam_step",
    "fidelity_report",
    "fit_transform",
    "init_mlp",
    "invert_transform",
    "mlp_backward",
    "mlp_forward",
    "sample_synthetic",
    "train_gan",
]
