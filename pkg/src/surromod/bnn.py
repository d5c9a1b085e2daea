"""Dropout neural network surrogate with Monte-Carlo predictive moments.

Training keeps dropout active with a fresh Bernoulli mask per sample and
minimizes batch mean squared error plus the weight decay term
``(1-p)/(2N) * ||theta||^2`` over all weights and biases. Prediction runs T
stochastic forward passes and reports the per-output sample mean and
``(1/T) sum f^2 - mean^2`` variance, pushed to original units through the
fitted output transform.

All linear algebra is plain numpy; gradients are hand-derived backprop and
are checked against finite differences in the test suite.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .design import Dataset
from .errors import InvalidArgumentError, TrainingDivergedError
from .optim import Adam
from .predictive import PredictionSet, PredictiveDistribution
from .transforms import (TransformPipeline, apply_boxcox, apply_standardize,
                         fit_pipeline, pushforward_gaussian)

DEFAULT_MC_SAMPLES = 30


@dataclass(frozen=True)
class BnnArchitecture:
    n_inputs: int
    n_outputs: int
    hidden_layers: tuple[int, ...] = (512, 512)
    activation_slope: float = 0.01   # leaky-ReLU negative-side slope
    dropout_p: float = 0.05
    dropout_inputs: bool = False     # off by default: keep low-D inputs intact

    def __post_init__(self):
        if self.n_inputs < 1 or self.n_outputs < 1:
            raise InvalidArgumentError("n_inputs and n_outputs must be positive")
        if len(self.hidden_layers) == 0 or any(w < 1 for w in self.hidden_layers):
            raise InvalidArgumentError("hidden layer widths must be positive")
        if not 0.0 < self.dropout_p < 1.0:
            raise InvalidArgumentError("dropout_p must lie in (0, 1)")
        object.__setattr__(self, "hidden_layers", tuple(self.hidden_layers))

    def layer_dims(self) -> list[tuple[int, int]]:
        dims = [self.n_inputs, *self.hidden_layers, self.n_outputs]
        return list(zip(dims[:-1], dims[1:]))


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 1200
    batch_size: int = 128
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise InvalidArgumentError("epochs must be >= 1")
        if self.batch_size < 1:
            raise InvalidArgumentError("batch_size must be >= 1")


@dataclass
class BnnModel:
    arch: BnnArchitecture
    weights: list[np.ndarray]        # per layer, shape (fan_in, fan_out)
    biases: list[np.ndarray]         # per layer, shape (fan_out,)
    pipeline: TransformPipeline | None = None
    train_log: list[float] = field(default_factory=list)
    seed: int | None = None
    output_names: list[str] | None = None
    units: list[str] | None = None

    def params_list(self) -> list[np.ndarray]:
        out = []
        for W, b in zip(self.weights, self.biases):
            out.extend([W, b])
        return out

    def copy(self) -> "BnnModel":
        return BnnModel(self.arch, [W.copy() for W in self.weights],
                        [b.copy() for b in self.biases], self.pipeline,
                        list(self.train_log), self.seed,
                        self.output_names, self.units)

    def resolved_names(self) -> tuple[list[str], list[str]]:
        names = self.output_names or [f"y{i}" for i in range(self.arch.n_outputs)]
        units = self.units or [""] * self.arch.n_outputs
        return names, units


def init(arch: BnnArchitecture, seed: int = 0) -> BnnModel:
    """Glorot-uniform weights (limit sqrt(6/(fan_in+fan_out))), zero biases."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in arch.layer_dims():
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return BnnModel(arch, weights, biases, seed=seed)


def draw_masks(arch: BnnArchitecture, n: int, rng: np.random.Generator
               ) -> list[np.ndarray]:
    """One Bernoulli(1-p) 0/1 mask row per sample for every hidden layer."""
    keep = 1.0 - arch.dropout_p
    return [(rng.random((n, w)) < keep).astype(float)
            for w in arch.hidden_layers]


def _forward_cache(model: BnnModel, X: np.ndarray,
                   masks: list[np.ndarray] | None):
    """Forward pass keeping intermediate activations for backprop."""
    arch = model.arch
    scale = 1.0 / (1.0 - arch.dropout_p)
    a = X
    pre, post = [], [X]
    n_hidden = len(arch.hidden_layers)
    for l in range(n_hidden):
        z = a @ model.weights[l] + model.biases[l]
        h = np.where(z > 0, z, arch.activation_slope * z)
        if masks is not None:
            h = h * masks[l] * scale
        pre.append(z)
        post.append(h)
        a = h
    out = a @ model.weights[-1] + model.biases[-1]
    return out, pre, post


def forward(model: BnnModel, x: np.ndarray,
            masks: list[np.ndarray] | None = None) -> np.ndarray:
    """Transformed-space network output for standardized input ``x``.

    ``masks`` holds one 0/1 array per hidden layer (matching the batch
    shape); values pass through inverted-dropout scaling ``1/(1-p)``. With
    ``masks=None`` the pass is deterministic: all units active, no scaling.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.shape[1] != model.arch.n_inputs:
        raise InvalidArgumentError(
            f"expected {model.arch.n_inputs} input columns, got {X.shape[1]}")
    if masks is not None:
        masks = [np.atleast_2d(np.asarray(m, dtype=float)) for m in masks]
        for m, w in zip(masks, model.arch.hidden_layers):
            if m.shape != (X.shape[0], w):
                raise InvalidArgumentError("mask shape does not match layer")
    out, _, _ = _forward_cache(model, X, masks)
    return out[0] if single else out


def loss(model: BnnModel, X: np.ndarray, Y: np.ndarray,
         n_total: int | None = None, masks: list[np.ndarray] | None = None,
         seed: int | None = None) -> float:
    """Batch objective in transformed space.

    Mean over the batch of per-sample squared error (summed across outputs)
    plus ``(1-p)/(2*n_total) * ||theta||^2`` over all weights and biases.
    ``n_total`` is the full training-set size (defaults to the batch size).
    Masks are drawn fresh per sample when not supplied.
    """
    val, _ = loss_and_grad(model, X, Y, n_total, masks, seed)
    return val


def loss_and_grad(model: BnnModel, X: np.ndarray, Y: np.ndarray,
                  n_total: int | None = None,
                  masks: list[np.ndarray] | None = None,
                  seed: int | None = None
                  ) -> tuple[float, list[np.ndarray]]:
    """Objective value and gradients ordered like ``model.params_list()``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    n = X.shape[0]
    if n == 0:
        raise InvalidArgumentError("empty batch")
    if masks is None:
        masks = draw_masks(model.arch, n, np.random.default_rng(seed))
    arch = model.arch
    n_total = n if n_total is None else n_total
    decay = (1.0 - arch.dropout_p) / (2.0 * n_total)
    scale = 1.0 / (1.0 - arch.dropout_p)

    out, pre, post = _forward_cache(model, X, masks)
    resid = out - Y
    theta_sq = sum(float((W * W).sum()) for W in model.weights) \
        + sum(float((b * b).sum()) for b in model.biases)
    value = float((resid * resid).sum()) / n + decay * theta_sq

    n_hidden = len(arch.hidden_layers)
    grads: list[np.ndarray | None] = [None] * (2 * (n_hidden + 1))
    G = (2.0 / n) * resid                       # d value / d out
    grads[2 * n_hidden] = post[-1].T @ G + 2.0 * decay * model.weights[-1]
    grads[2 * n_hidden + 1] = G.sum(axis=0) + 2.0 * decay * model.biases[-1]
    D = G @ model.weights[-1].T                 # grad wrt post-dropout h
    for l in range(n_hidden - 1, -1, -1):
        D = D * masks[l] * scale
        D = D * np.where(pre[l] > 0, 1.0, arch.activation_slope)
        grads[2 * l] = post[l].T @ D + 2.0 * decay * model.weights[l]
        grads[2 * l + 1] = D.sum(axis=0) + 2.0 * decay * model.biases[l]
        D = D @ model.weights[l].T
    return value, grads  # type: ignore[return-value]


def train(model: BnnModel, ds: Dataset, config: TrainConfig) -> BnnModel:
    """Adam on the dropout objective with seeded per-epoch shuffling.

    Fits the transform pipeline on ``ds`` unless the model already carries
    one; returns a new model, leaving the input model untouched. Aborts with
    diagnostics if the loss turns non-finite.
    """
    model = model.copy()
    if model.pipeline is None:
        model.pipeline = fit_pipeline(ds.X, ds.Y, ds.input_names)
    if model.output_names is None:
        model.output_names = list(ds.output_names)
        units_map = ds.meta.get("output_units", {})
        model.units = [units_map.get(n, "") for n in ds.output_names]
    Xt = apply_standardize(model.pipeline.input, ds.X)
    Yt = apply_boxcox(model.pipeline.output, ds.Y)
    n = Xt.shape[0]
    rng = np.random.default_rng(config.seed)
    params = model.params_list()
    opt = Adam(params, lr=config.learning_rate, beta1=config.beta1,
               beta2=config.beta2, eps=config.eps)
    log = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        epoch_losses = []
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            masks = draw_masks(model.arch, idx.size, rng)
            # overflow here is handled explicitly by the divergence check
            with np.errstate(over="ignore", invalid="ignore"):
                value, grads = loss_and_grad(model, Xt[idx], Yt[idx],
                                             n_total=n, masks=masks)
            if not np.isfinite(value):
                gnorm = float(np.sqrt(sum((g * g).sum() for g in grads
                                          if np.all(np.isfinite(g)))))
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch {start // config.batch_size}"
                    f" (grad norm {gnorm:.3g})",
                    epoch=epoch, batch=start // config.batch_size,
                    grad_norm=gnorm)
            opt.step(grads)
            epoch_losses.append(value)
        log.append(float(np.mean(epoch_losses)))
    model.train_log = log
    model.seed = config.seed
    return model


def _mc_moments(model: BnnModel, Xt: np.ndarray, T: int,
                rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Latent mean and (1/T) sum f^2 - mean^2 variance over T mask draws."""
    n = Xt.shape[0]
    k = model.arch.n_outputs
    s = np.zeros((n, k))
    ss = np.zeros((n, k))
    for _ in range(T):
        masks = draw_masks(model.arch, n, rng)
        out, _, _ = _forward_cache(model, Xt, masks)
        s += out
        ss += out * out
    mean = s / T
    var = np.maximum(ss / T - mean * mean, 0.0)
    return mean, var


def predict_mc(model: BnnModel, x: np.ndarray, T: int = DEFAULT_MC_SAMPLES,
               seed: int | None = None
               ) -> PredictiveDistribution | PredictionSet:
    """Monte-Carlo dropout prediction in original units.

    Standardizes ``x``, runs ``T`` stochastic passes, converts the
    transformed-space moments to original units through the Gauss-Hermite
    pushforward. A single input vector yields a PredictiveDistribution; a
    matrix yields a PredictionSet.
    """
    if T < 2:
        raise InvalidArgumentError("T must be >= 2 to estimate a variance")
    if model.pipeline is None:
        raise InvalidArgumentError("model has no fitted transform pipeline")
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    Xt = apply_standardize(model.pipeline.input, X)
    rng = np.random.default_rng(seed)
    lat_mean, lat_var = _mc_moments(model, Xt, T, rng)
    mean, var, clipped = pushforward_gaussian(model.pipeline.output,
                                              lat_mean, lat_var)
    names, units = model.resolved_names()
    ps = PredictionSet(mean, var, names, units,
                       mc_samples_used=T, range_clipped=clipped,
                       latent_mean=lat_mean, latent_var=lat_var,
                       boxcox=model.pipeline.output)
    return ps.point(0) if single else ps


def default_grid(n_inputs: int, n_outputs: int) -> list[BnnArchitecture]:
    """The full architecture search grid: depth x width x dropout rate."""
    grid = []
    for depth, width, p in itertools.product([1, 2, 3], [256, 512, 1024],
                                             [0.05, 0.10, 0.20]):
        grid.append(BnnArchitecture(n_inputs, n_outputs, (width,) * depth,
                                    dropout_p=p))
    return grid


def _fold_score(y: np.ndarray, yhat: np.ndarray) -> float:
    """Validation R-squared, falling back to -MSE on degenerate folds."""
    ss_tot = float(((y - y.mean()) ** 2).sum())
    ss_res = float(((y - yhat) ** 2).sum())
    if y.size < 2 or ss_tot == 0.0:
        return -ss_res / y.size
    return 1.0 - ss_res / ss_tot


def cross_validate(ds: Dataset, grid: list[BnnArchitecture], k: int = 5,
                   seed: int = 0, config: TrainConfig | None = None,
                   mc_samples: int = DEFAULT_MC_SAMPLES
                   ) -> tuple[BnnArchitecture, list[dict]]:
    """k-fold architecture selection by mean validation R-squared.

    The transform pipeline is fit once on the full dataset (folds can be too
    small to refit a Box-Cox power reliably); each fold trains from a fresh
    seeded initialization. Returns the best architecture and the full score
    table, one record per grid entry. Degenerate validation folds (a single
    row, or constant targets) score as the negative mean squared error so
    leave-one-out selection still ranks configurations.
    """
    if k > ds.n:
        raise InvalidArgumentError(f"k ({k}) cannot exceed the row count ({ds.n})")
    if k < 2:
        raise InvalidArgumentError("k must be >= 2")
    if not grid:
        raise InvalidArgumentError("empty architecture grid")
    config = config or TrainConfig()
    pipeline = fit_pipeline(ds.X, ds.Y, ds.input_names)
    rng = np.random.default_rng(seed)
    order = rng.permutation(ds.n)
    folds = np.array_split(order, k)
    table = []
    for arch in grid:
        fold_scores = []
        for f, val_idx in enumerate(folds):
            train_idx = np.setdiff1d(order, val_idx, assume_unique=True)
            sub = Dataset(ds.X[train_idx], ds.Y[train_idx], ds.input_names,
                          ds.output_names, ds.space)
            model = init(arch, seed=seed + f)
            model.pipeline = pipeline
            model = train(model, sub, config)
            preds = predict_mc(model, ds.X[val_idx], T=mc_samples,
                               seed=seed + 1000 + f)
            scores = [_fold_score(ds.Y[val_idx][:, j], preds.mean[:, j])
                      for j in range(ds.Y.shape[1])]
            fold_scores.append(float(np.mean(scores)))
        table.append({
            "hidden_layers": list(arch.hidden_layers),
            "dropout_p": arch.dropout_p,
            "fold_r2": fold_scores,
            "mean_r2": float(np.mean(fold_scores)),
        })
    best = int(np.argmax([rec["mean_r2"] for rec in table]))
    return grid[best], table
