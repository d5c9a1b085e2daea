"""Invertible preprocessing: input standardization and adaptive Box-Cox.

Inputs are standardized column-wise. Outputs get a per-column Box-Cox
transform with an automatic positive shift and a maximum-likelihood power
``lambda``, followed by standardization of the transformed column. Surrogates
work entirely in the transformed space; predictions travel back to original
units either pointwise (``invert_boxcox``) or as Gaussian distributions
(``pushforward_gaussian``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import (DegenerateColumnError, DomainError, InsufficientDataError,
                     InvalidArgumentError)

LAMBDA_BOUNDS = (-5.0, 5.0)
GH_NODES_DEFAULT = 21
# inverse-transform values beyond this count as out of float range; the cap
# keeps squared moments finite (cap^2 < float64 max)
_VALUE_CAP = float(np.sqrt(np.finfo(float).max)) / 4.0


@dataclass(frozen=True)
class StandardizeParams:
    mean: np.ndarray
    std: np.ndarray

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "StandardizeParams":
        return cls(np.asarray(d["mean"], float), np.asarray(d["std"], float))


@dataclass(frozen=True)
class BoxCoxParams:
    """Per-output Box-Cox state: power, positive shift, post-standardization."""

    lam: np.ndarray
    shift: np.ndarray
    post_standardize: StandardizeParams

    def to_dict(self) -> dict:
        return {"lambda": self.lam.tolist(), "shift": self.shift.tolist(),
                "post_standardize": self.post_standardize.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "BoxCoxParams":
        return cls(np.asarray(d["lambda"], float), np.asarray(d["shift"], float),
                   StandardizeParams.from_dict(d["post_standardize"]))


@dataclass(frozen=True)
class TransformPipeline:
    input: StandardizeParams
    output: BoxCoxParams

    def to_dict(self) -> dict:
        return {"input": self.input.to_dict(), "output": self.output.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "TransformPipeline":
        return cls(StandardizeParams.from_dict(d["input"]),
                   BoxCoxParams.from_dict(d["output"]))


def fit_standardize(X: np.ndarray, names: list[str] | None = None) -> StandardizeParams:
    """Column means and sample standard deviations.

    Raises
    ------
    DegenerateColumnError
        If a column has zero sample variance; the message names the column.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise InvalidArgumentError("expected a 2-D matrix")
    if X.shape[0] < 2:
        raise InsufficientDataError("standardization needs at least 2 rows")
    mean = X.mean(axis=0)
    std = X.std(axis=0, ddof=1)
    for j in np.flatnonzero(std == 0.0):
        label = names[j] if names else f"column {j}"
        raise DegenerateColumnError(f"{label} has zero variance")
    return StandardizeParams(mean, std)


def apply_standardize(params: StandardizeParams, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    _check_cols(X, params.mean.size)
    return (X - params.mean) / params.std


def invert_standardize(params: StandardizeParams, Z: np.ndarray) -> np.ndarray:
    Z = np.asarray(Z, dtype=float)
    _check_cols(Z, params.mean.size)
    return Z * params.std + params.mean


def _check_cols(X: np.ndarray, k: int) -> None:
    if X.shape[-1] != k:
        raise InvalidArgumentError(
            f"expected {k} columns, got {X.shape[-1]}"
        )


def _boxcox_core(z: np.ndarray, lam: float) -> np.ndarray:
    """((z^lam)-1)/lam with the lam->0 limit log(z); z must be > 0."""
    logz = np.log(z)
    if lam == 0.0:
        return logz
    return np.expm1(lam * logz) / lam


def _boxcox_llf(lam: float, z: np.ndarray, logz_sum: float) -> float:
    """Profile log-likelihood of the Box-Cox power for positive data z."""
    t = _boxcox_core(z, lam)
    var = t.var()  # MLE variance (ddof=0)
    if not np.isfinite(var) or var <= 0:
        return -np.inf
    n = z.size
    return -0.5 * n * np.log(var) + (lam - 1.0) * logz_sum


POINT_MASS_SHARE = 0.25
"""Mode share above which a column is treated as not power-transformable."""

SPIKE_JOIN_QUANTILE = 5.0
"""Percentile of the mass above the spike used as the log-join shift.

The shift trades spike adjacency against resolution: larger values close the
gap between the spike and the continuum but flatten the log over the small
values just above it, where relative risk concentrates for intermittent
outputs. The lower vigintile keeps those rows resolvable while still placing
the spike within the continuum's reach; quantiles much below it let
near-zero rows dominate the transformed scale with noise.
"""


def _mode_share(y: np.ndarray) -> float:
    """Fraction of rows held by the column's single most frequent value."""
    _, counts = np.unique(y, return_counts=True)
    return float(counts.max()) / y.size


def _point_mass_transform(y: np.ndarray, eps: float) -> tuple[float, float]:
    """Power and shift for a column dominated by a single repeated value.

    No power transform can pull a dominant point mass toward normality; a
    maximum-likelihood power instead shoves the repeated value far from the
    continuous mass, compressing the continuum into a sliver of the
    standardized scale and making the inverse map so steep that Gaussian
    latent moments stop being finite.

    When the repeated value sits at the column minimum (outputs that idle at
    exactly zero for many designs), use ``lambda = 0`` with a shift equal to
    the lower decile of the mass above the spike. That keeps the spike
    adjacent to the continuum instead of digging a hole below it, while the
    log still compresses the upper range, so spread in the transformed space
    stays close to relative spread in original units. Columns with an
    interior spike, or without enough distinct values above the minimum,
    fall back to the affine map ``lambda = 1``.
    """
    ymin = float(y.min())
    above = y[y > ymin]
    values, counts = np.unique(y, return_counts=True)
    mode = float(values[np.argmax(counts)])
    if mode == ymin and above.size >= 2 and above.max() > above.min():
        shift = float(np.percentile(above, SPIKE_JOIN_QUANTILE)) - ymin
        if ymin + shift > 0.0:
            return 0.0, shift
    return 1.0, max(0.0, eps - ymin)


def fit_boxcox(Y: np.ndarray,
               point_mass_share: float | None = None) -> BoxCoxParams:
    """Fit per-output shift and MLE power, then standardize the result.

    The shift is ``max(0, eps - min(y))`` with ``eps`` a 1e-6 fraction of the
    column range (or of 1 when the column is constant), which guarantees
    ``y + shift > 0`` on the fit data. The power maximizes the profile
    log-likelihood over a bracketed search on ``[-5, 5]``.

    ``point_mass_share``, when set, skips the power search for any column
    whose most frequent value holds at least that fraction of the rows and
    uses ``_point_mass_transform`` instead: a log map whose shift joins the
    spike to the rest of the mass when the spike sits at the minimum, or a
    plain affine map otherwise. Intermittent outputs that sit at exactly
    zero for a large share of the designs are the motivating case.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2:
        raise InvalidArgumentError("expected a 2-D matrix")
    n, k = Y.shape
    if n < 3:
        raise InsufficientDataError("Box-Cox fitting needs at least 3 rows")
    lam = np.empty(k)
    shift = np.empty(k)
    T = np.empty_like(Y)
    for j in range(k):
        y = Y[:, j]
        rng_j = y.max() - y.min()
        eps = 1e-6 * (rng_j if rng_j > 0 else 1.0)
        if point_mass_share is not None and _mode_share(y) >= point_mass_share:
            lam[j], shift[j] = _point_mass_transform(y, eps)
            z = y + shift[j]
        else:
            shift[j] = max(0.0, eps - y.min())
            z = y + shift[j]
            logz_sum = float(np.log(z).sum())
            res = minimize_scalar(lambda l: -_boxcox_llf(l, z, logz_sum),
                                  bounds=LAMBDA_BOUNDS, method="bounded",
                                  options={"xatol": 1e-8})
            lam[j] = float(res.x)
        T[:, j] = _boxcox_core(z, lam[j])
    post = fit_standardize(T)
    return BoxCoxParams(lam, shift, post)


def apply_boxcox(params: BoxCoxParams, Y: np.ndarray,
                 on_invalid: str = "raise") -> np.ndarray:
    """Forward transform to the standardized Box-Cox space.

    ``on_invalid`` controls what happens when ``y + shift <= 0`` (values
    below the transform's domain): ``"raise"`` signals a domain error,
    ``"neg_inf"`` maps them to -inf, which keeps order comparisons against
    latent quantiles valid.
    """
    Y = np.asarray(Y, dtype=float)
    squeeze = Y.ndim == 1
    if squeeze:
        Y = Y[None, :]
    _check_cols(Y, params.lam.size)
    Z = Y + params.shift
    invalid = Z <= 0.0
    if invalid.any():
        if on_invalid == "raise":
            j = int(np.argwhere(invalid)[0, 1])
            raise DomainError(
                f"output column {j}: value + shift must be > 0 for the Box-Cox transform"
            )
        Z = np.where(invalid, 1.0, Z)  # placeholder, overwritten below
    T = np.empty_like(Z)
    for j in range(params.lam.size):
        T[:, j] = _boxcox_core(Z[:, j], params.lam[j])
    T = (T - params.post_standardize.mean) / params.post_standardize.std
    if invalid.any():
        T = np.where(invalid, -np.inf, T)
    return T[0] if squeeze else T


def invert_boxcox(params: BoxCoxParams, T: np.ndarray) -> np.ndarray:
    """Map standardized Box-Cox values back to original units.

    Raises
    ------
    DomainError
        If ``lam * t + 1 <= 0`` for some value, i.e. the value lies outside
        the image of the forward map. This signals a prediction outside the
        physically reachable range; callers decide whether to clamp.
    """
    T = np.asarray(T, dtype=float)
    squeeze = T.ndim == 1
    if squeeze:
        T = T[None, :]
    _check_cols(T, params.lam.size)
    U = T * params.post_standardize.std + params.post_standardize.mean
    Y = np.empty_like(U)
    for j in range(params.lam.size):
        lam = params.lam[j]
        if lam == 0.0:
            Y[:, j] = np.exp(U[:, j]) - params.shift[j]
        else:
            arg = lam * U[:, j] + 1.0
            if np.any(arg <= 0.0):
                raise DomainError(
                    f"output column {j}: value outside the invertible range"
                )
            Y[:, j] = np.exp(np.log(arg) / lam) - params.shift[j]
    return Y[0] if squeeze else Y


def _invert_col(params: BoxCoxParams, j: int, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Inverse power map for unstandardized values of column j.

    Returns (values, valid_mask); invalid entries hold the domain edge value.
    """
    lam = params.lam[j]
    if lam == 0.0:
        with np.errstate(over="ignore"):
            return np.exp(u) - params.shift[j], np.ones_like(u, dtype=bool)
    arg = lam * u + 1.0
    valid = arg > 0.0
    safe = np.where(valid, arg, np.finfo(float).tiny)
    with np.errstate(over="ignore"):
        return np.exp(np.log(safe) / lam) - params.shift[j], valid


def pushforward_gaussian(params: BoxCoxParams, mean_latent: np.ndarray,
                         var_latent: np.ndarray, nodes: int = GH_NODES_DEFAULT
                         ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Moments in original units of Gaussians living in the transformed space.

    Uses Gauss-Hermite quadrature through the inverse transform. Nodes that
    fall outside the invertible domain are dropped (weights renormalized) and
    the affected prediction is flagged as range-clipped. A zero-variance
    latent collapses to the point inverse with zero variance.

    Parameters
    ----------
    mean_latent, var_latent : ndarray (n, k)
        Per-output Gaussian moments in the standardized Box-Cox space.

    Returns
    -------
    (mean, var, clipped) : ndarrays of shape (n, k); ``clipped`` is boolean.
    """
    mean_latent = np.atleast_2d(np.asarray(mean_latent, dtype=float))
    var_latent = np.atleast_2d(np.asarray(var_latent, dtype=float))
    if np.any(var_latent < 0):
        raise InvalidArgumentError("latent variance must be >= 0")
    n, k = mean_latent.shape
    x_nodes, w_nodes = np.polynomial.hermite.hermgauss(nodes)
    w_nodes = w_nodes / np.sqrt(np.pi)
    std_params = params.post_standardize
    mean = np.empty((n, k))
    var = np.empty((n, k))
    clipped = np.zeros((n, k), dtype=bool)
    for j in range(k):
        mu, sd = mean_latent[:, j], np.sqrt(var_latent[:, j])
        # unstandardized transformed-space nodes, shape (n, nodes)
        t = mu[:, None] + np.sqrt(2.0) * sd[:, None] * x_nodes[None, :]
        u = t * std_params.std[j] + std_params.mean[j]
        g, valid = _invert_col(params, j, u)
        # nodes past float range behave like out-of-domain truncation: the
        # tail mass is dropped and the prediction is flagged
        valid = valid & np.isfinite(g) & (np.abs(g) < _VALUE_CAP)
        g = np.where(valid, g, 0.0)
        w = np.where(valid, w_nodes[None, :], 0.0)
        wsum = w.sum(axis=1)
        dead = wsum == 0.0
        wsum = np.where(dead, 1.0, wsum)
        w = w / wsum[:, None]
        m1 = (w * g).sum(axis=1)
        m2 = (w * g * g).sum(axis=1)
        mean[:, j] = m1
        var[:, j] = np.maximum(m2 - m1 * m1, 0.0)
        clipped[:, j] = ~valid.all(axis=1)
        exact = sd == 0.0
        if exact.any():
            u0 = mu[exact] * std_params.std[j] + std_params.mean[j]
            g0, ok0 = _invert_col(params, j, u0)
            ok0 = ok0 & np.isfinite(g0)
            mean[exact, j] = np.clip(np.nan_to_num(g0, posinf=_VALUE_CAP,
                                                   neginf=-_VALUE_CAP),
                                     -_VALUE_CAP, _VALUE_CAP)
            var[exact, j] = 0.0
            clipped[exact, j] = ~ok0
        if dead.any():
            # the whole Gaussian sits outside the domain; pin to the edge
            u0 = mu[dead] * std_params.std[j] + std_params.mean[j]
            g0, _ = _invert_col(params, j, u0)
            mean[dead, j] = np.clip(np.nan_to_num(g0, posinf=_VALUE_CAP,
                                                  neginf=-_VALUE_CAP),
                                    -_VALUE_CAP, _VALUE_CAP)
            var[dead, j] = 0.0
            clipped[dead, j] = True
    return mean, var, clipped


def fit_pipeline(X: np.ndarray, Y: np.ndarray,
                 input_names: list[str] | None = None) -> TransformPipeline:
    """Fit input standardization and output Box-Cox in one shot.

    Output columns dominated by a single repeated value (for example loads
    that are exactly zero for a big share of the designs) bypass the
    likelihood search for the power; see ``fit_boxcox`` for the rationale.
    """
    return TransformPipeline(fit_standardize(X, input_names),
                             fit_boxcox(Y, point_mass_share=POINT_MASS_SHARE))


def identity_pipeline(n_inputs: int, n_outputs: int) -> TransformPipeline:
    """A pipeline whose forward and inverse maps are exact identities.

    Useful for models trained on data that is already in the target space.
    The output leg uses lambda=1 with a post-standardization that cancels
    the Box-Cox "-1" offset, so apply(y) = y exactly on the power-transform
    domain y > 0 (zero shift). Latent moments pass through untouched either
    way; only original-unit conversion of non-positive values is undefined.
    """
    inp = StandardizeParams(np.zeros(n_inputs), np.ones(n_inputs))
    post = StandardizeParams(np.full(n_outputs, -1.0), np.ones(n_outputs))
    out = BoxCoxParams(np.ones(n_outputs), np.zeros(n_outputs), post)
    return TransformPipeline(inp, out)
