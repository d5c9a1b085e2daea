"""Uncertainty-aware surrogate modeling for building-energy simulation.

Train dropout-based Bayesian neural networks or sparse variational GPs
against a fast synthetic annual-energy simulator, quantify their predictive
uncertainty, and route low-confidence queries back to the simulator.
"""
__version__ = "0.1.0"

from .design import (DesignSpace, Dataset, Parameter, lhs_sample,
                     load_dataset, load_space, save_dataset, save_space,
                     split_train_test)
from .errors import (ArtifactFormatError, DegenerateColumnError, DomainError,
                     IllConditionedKernelError, InsufficientDataError,
                     InvalidArgumentError, InvalidSpaceError,
                     TrainingDivergedError)
from .predictive import PredictionSet, PredictiveDistribution
from .simulator import (BuildingConstants, OUTPUT_NAMES, default_space,
                        generate_dataset, simulate, simulate_batch)
from .transforms import (BoxCoxParams, StandardizeParams, TransformPipeline,
                         apply_boxcox, apply_standardize, fit_boxcox,
                         fit_pipeline, fit_standardize, identity_pipeline,
                         invert_boxcox, invert_standardize,
                         pushforward_gaussian)

__all__ = [
    "__version__",
    "ArtifactFormatError", "BoxCoxParams", "BuildingConstants", "Dataset", "DegenerateColumnError",
    "DesignSpace", "DomainError", "IllConditionedKernelError",
    "InsufficientDataError", "InvalidArgumentError", "InvalidSpaceError",
    "OUTPUT_NAMES", "Parameter", "PredictionSet", "PredictiveDistribution",
    "StandardizeParams", "TrainingDivergedError", "TransformPipeline",
    "apply_boxcox", "apply_standardize", "default_space", "fit_boxcox",
    "fit_pipeline", "fit_standardize", "generate_dataset",
    "identity_pipeline", "invert_boxcox", "invert_standardize", "lhs_sample",
    "load_dataset", "load_space", "pushforward_gaussian", "save_dataset",
    "save_space", "simulate", "simulate_batch", "split_train_test",
]
