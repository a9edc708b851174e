"""Dialogue policy learning with intrinsic rewards."""

from ._core import (
    Environment,
    ImdialError,
    Trainer,
    __version__,
    arms,
    clipped_surrogate_loss,
    compute_gae,
    compute_metrics,
)

__all__ = [
    "Environment",
    "ImdialError",
    "Trainer",
    "__version__",
    "arms",
    "clipped_surrogate_loss",
    "compute_gae",
    "compute_metrics",
]
