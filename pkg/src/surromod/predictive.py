"""Containers for probabilistic surrogate predictions.

Models predict Gaussians in the transformed output space; these containers
carry both the latent moments and the pushed-forward moments in original
units, so downstream consumers (calibration, routing, the HTTP service) can
pick the space appropriate to their computation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PredictiveDistribution:
    """Prediction for a single input point."""

    mean: np.ndarray            # (n_outputs,) original units
    variance: np.ndarray        # (n_outputs,) original units, >= 0
    units: list[str]
    mc_samples_used: int
    range_clipped: np.ndarray   # (n_outputs,) bool

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(self.variance)


@dataclass
class PredictionSet:
    """Stacked predictions for a batch of inputs.

    ``latent_mean``/``latent_var`` are the Gaussian moments in the
    standardized Box-Cox space; ``boxcox`` is the output transform that links
    the two spaces (None when predictions were made directly in original
    units, e.g. synthetic data in tests).
    """

    mean: np.ndarray            # (n, k) original units
    variance: np.ndarray        # (n, k) original units
    output_names: list[str]
    units: list[str]
    mc_samples_used: int = 0
    range_clipped: np.ndarray | None = None
    latent_mean: np.ndarray | None = None
    latent_var: np.ndarray | None = None
    boxcox: "object | None" = None   # transforms.BoxCoxParams
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.mean = np.atleast_2d(np.asarray(self.mean, dtype=float))
        self.variance = np.atleast_2d(np.asarray(self.variance, dtype=float))
        if self.range_clipped is None:
            self.range_clipped = np.zeros(self.mean.shape, dtype=bool)

    def __len__(self) -> int:
        return self.mean.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.mean.shape[1]

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(self.variance)

    def point(self, i: int) -> PredictiveDistribution:
        return PredictiveDistribution(self.mean[i].copy(), self.variance[i].copy(),
                                      list(self.units), self.mc_samples_used,
                                      self.range_clipped[i].copy())
