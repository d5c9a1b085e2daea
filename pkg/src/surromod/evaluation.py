"""Accuracy, calibration, sharpness and discard-curve evaluation.

Accuracy metrics:

    r2    = 1 - sum (y - yhat)^2 / sum (y - mean(y))^2
    mape  = mean |y - yhat| / |y| * 100            (y = 0 excluded, counted)
    apeQ  = Q-th percentile of |y - yhat|/|y|*100  (linear interpolation)

Calibration follows the one-sided quantile form: observed(p) is the fraction
of test points with y <= F^-1(p) under the predicted Gaussian. Predictions
produced through the Box-Cox pushforward are compared in the transformed
space, where the Gaussian assumption actually lives; the event is invariant
under the monotone inverse map. A derived centered-interval view is provided
for plotting. Sharpness is the variance of the predicted standard deviations
in original units (the sigma-vs-sigma^2 choice is recorded in the report
metadata).

Discard curves re-rank the test set by predicted uncertainty (or by true
error for the oracle, or uniformly at random) and recompute a metric on the
retained fraction.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .design import Dataset
from .errors import InvalidArgumentError
from .predictive import PredictionSet, PredictiveDistribution
from .transforms import apply_boxcox

DEFAULT_LEVELS = np.linspace(0.05, 0.95, 19)
DEFAULT_FRACTIONS = np.linspace(1.0, 0.5, 11)
DEFAULT_CENTERED = np.linspace(0.1, 0.9, 9)


def r2(y: np.ndarray, yhat: np.ndarray) -> float:
    """Coefficient of determination."""
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    _check_pair(y, yhat)
    ss_res = float(((y - yhat) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else -np.inf
    return 1.0 - ss_res / ss_tot


def _ape_values(y: np.ndarray, yhat: np.ndarray) -> tuple[np.ndarray, int]:
    """Absolute percentage errors over nonzero targets, plus excluded count."""
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    _check_pair(y, yhat)
    valid = y != 0.0
    excluded = int((~valid).sum())
    if not valid.any():
        raise InvalidArgumentError("all targets are zero; percentage metrics undefined")
    ape = np.abs(y[valid] - yhat[valid]) / np.abs(y[valid]) * 100.0
    return ape, excluded


def mape(y: np.ndarray, yhat: np.ndarray) -> float:
    """Mean absolute percentage error in percent (zero targets excluded)."""
    ape, _ = _ape_values(y, yhat)
    return float(ape.mean())


def ape_percentile(y: np.ndarray, yhat: np.ndarray, q: float = 90.0) -> float:
    """q-th percentile of the absolute percentage errors (linear interpolation)."""
    ape, _ = _ape_values(y, yhat)
    return float(np.percentile(ape, q))


def zero_excluded_count(y: np.ndarray) -> int:
    return int((np.asarray(y) == 0.0).sum())


def _check_pair(y: np.ndarray, yhat: np.ndarray) -> None:
    if y.shape != yhat.shape:
        raise InvalidArgumentError("y and yhat must have equal length")
    if y.size < 2:
        raise InvalidArgumentError("metrics need at least 2 samples")


@dataclass
class CalibrationCurve:
    levels: np.ndarray
    observed: np.ndarray
    auc_error: float
    sharpness: float

    def to_dict(self) -> dict:
        return {"levels": self.levels.tolist(), "observed": self.observed.tolist(),
                "auc_error": self.auc_error, "sharpness": self.sharpness}


def _observed_fractions(mu: np.ndarray, sd: np.ndarray, y: np.ndarray,
                        levels: np.ndarray) -> np.ndarray:
    """Fraction of y_i at or below each predicted Gaussian quantile.

    Zero-sd predictions act as degenerate steps: the event holds iff y <= mu,
    independent of the level.
    """
    z = norm.ppf(levels)
    # (n, L) quantile matrix; sd = 0 rows reduce to mu
    q = mu[:, None] + sd[:, None] * z[None, :]
    return (y[:, None] <= q).mean(axis=0)


def calibration_curve(preds: PredictionSet | list[PredictiveDistribution],
                      y_true: np.ndarray,
                      levels: np.ndarray = DEFAULT_LEVELS,
                      output: int | None = None) -> CalibrationCurve:
    """One-sided calibration curve for one output (or pooled over all).

    When the predictions carry a Box-Cox transform, the counting event
    ``y <= F^-1(p)`` is evaluated in transformed space where the predictive
    distribution is Gaussian; otherwise the original-unit moments are used
    directly. Sharpness is always the variance of the original-unit predicted
    standard deviations.
    """
    ps = _as_set(preds)
    levels = np.asarray(levels, dtype=float)
    if np.any(levels <= 0) or np.any(levels >= 1) or np.any(np.diff(levels) <= 0):
        raise InvalidArgumentError("levels must be strictly increasing in (0,1)")
    Y = np.atleast_2d(np.asarray(y_true, dtype=float))
    if Y.shape[0] == 1 and len(ps) > 1:
        Y = Y.T
    if ps.boxcox is not None and ps.latent_mean is not None:
        mu, sd = ps.latent_mean, np.sqrt(ps.latent_var)
        t = apply_boxcox(ps.boxcox, Y, on_invalid="neg_inf")
    else:
        mu, sd = ps.mean, ps.std
        t = Y
    cols = range(ps.n_outputs) if output is None else [output]
    obs = np.zeros_like(levels)
    count = 0
    sig_pool = []
    for j in cols:
        obs += _observed_fractions(mu[:, j], sd[:, j], t[:, j], levels) * len(ps)
        count += len(ps)
        sig_pool.append(ps.std[:, j])
    obs /= count
    sig = np.concatenate(sig_pool)
    sharpness = float(sig.var())
    auc = float(np.abs(obs - levels).mean())
    return CalibrationCurve(levels, obs, auc, sharpness)


def centered_coverage(curve_levels: np.ndarray, observed: np.ndarray,
                      centered: np.ndarray = DEFAULT_CENTERED
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Central-interval view derived from a one-sided curve.

    Coverage of the central c-interval is observed((1+c)/2) - observed((1-c)/2)
    wherever both tail levels are on the one-sided grid.
    """
    lv = np.asarray(curve_levels)
    obs = np.asarray(observed)
    cs, cov = [], []
    for c in centered:
        hi, lo = (1 + c) / 2, (1 - c) / 2
        i_hi = np.flatnonzero(np.isclose(lv, hi))
        i_lo = np.flatnonzero(np.isclose(lv, lo))
        if i_hi.size and i_lo.size:
            cs.append(c)
            cov.append(obs[i_hi[0]] - obs[i_lo[0]])
    return np.asarray(cs), np.asarray(cov)


@dataclass
class DiscardCurve:
    retained_fractions: np.ndarray
    error_by_uncertainty: np.ndarray
    error_by_oracle: np.ndarray
    error_random: np.ndarray
    metric: str

    def to_dict(self) -> dict:
        return {"retained_fractions": self.retained_fractions.tolist(),
                "error_by_uncertainty": self.error_by_uncertainty.tolist(),
                "error_by_oracle": self.error_by_oracle.tolist(),
                "error_random": self.error_random.tolist(),
                "metric": self.metric}


def _reduce(errors: np.ndarray, metric: str) -> float:
    if metric == "mape":
        return float(errors.mean())
    if metric == "ape90":
        return float(np.percentile(errors, 90.0))
    raise InvalidArgumentError(f"unknown discard metric {metric!r}")


def discard_curve(abs_errors: np.ndarray, uncertainties: np.ndarray,
                  fractions: np.ndarray = DEFAULT_FRACTIONS,
                  metric: str = "mape", seed: int = 0) -> DiscardCurve:
    """Metric over retained subsets as uncertain samples are discarded.

    For each retained fraction f the floor(f*n) samples with the smallest
    uncertainty are kept (smallest true error for the oracle curve; a seeded
    uniform subset for the random baseline), and the metric is recomputed on
    that subset. Sorting is stable, so ties resolve by original index.
    """
    e = np.asarray(abs_errors, dtype=float)
    u = np.asarray(uncertainties, dtype=float)
    if e.shape != u.shape or e.ndim != 1:
        raise InvalidArgumentError("errors and uncertainties must be equal-length vectors")
    if np.any(e < 0):
        raise InvalidArgumentError("errors must be >= 0")
    n = e.size
    fractions = np.asarray(fractions, dtype=float)
    order_u = np.argsort(u, kind="stable")
    order_o = np.argsort(e, kind="stable")
    order_r = np.random.default_rng(seed).permutation(n)
    by_u, by_o, by_r = [], [], []
    for f in fractions:
        keep = int(np.floor(f * n))
        if keep < 1:
            raise InvalidArgumentError(f"retained fraction {f} leaves no samples")
        by_u.append(_reduce(e[order_u[:keep]], metric))
        by_o.append(_reduce(e[order_o[:keep]], metric))
        by_r.append(_reduce(e[order_r[:keep]], metric))
    return DiscardCurve(fractions, np.array(by_u), np.array(by_o),
                        np.array(by_r), metric)


def random_discard_band(abs_errors: np.ndarray,
                        fractions: np.ndarray = DEFAULT_FRACTIONS,
                        metric: str = "mape", n_resamples: int = 200,
                        seed: int = 0) -> dict[str, np.ndarray]:
    """Monte-Carlo band of the random-discard baseline.

    Returns the mean and the 5th/95th percentile envelopes over
    ``n_resamples`` independent seeded subsets, per retained fraction.
    """
    e = np.asarray(abs_errors, dtype=float)
    n = e.size
    rng = np.random.default_rng(seed)
    fractions = np.asarray(fractions, dtype=float)
    vals = np.empty((n_resamples, fractions.size))
    for r in range(n_resamples):
        perm = rng.permutation(n)
        for fi, f in enumerate(fractions):
            keep = int(np.floor(f * n))
            vals[r, fi] = _reduce(e[perm[:keep]], metric)
    return {"mean": vals.mean(axis=0),
            "low5": np.percentile(vals, 5.0, axis=0),
            "high95": np.percentile(vals, 95.0, axis=0)}


def _as_set(preds) -> PredictionSet:
    if isinstance(preds, PredictionSet):
        return preds
    pts = list(preds)
    ps = PredictionSet(np.stack([p.mean for p in pts]),
                       np.stack([p.variance for p in pts]),
                       output_names=[f"y{i}" for i in range(pts[0].mean.size)],
                       units=list(pts[0].units),
                       mc_samples_used=pts[0].mc_samples_used,
                       range_clipped=np.stack([p.range_clipped for p in pts]))
    lat_m = getattr(pts[0], "latent_mean", None)
    if lat_m is not None:
        ps.latent_mean = np.stack([p.latent_mean for p in pts])
        ps.latent_var = np.stack([p.latent_var for p in pts])
        ps.boxcox = pts[0].boxcox
    return ps


def ranking_sigma(preds: PredictionSet) -> np.ndarray:
    """Per-output spread used to rank predictions for discard and routing.

    Prefers the standard deviation in the model's own output space (the
    standardized transform space), falling back to original-unit sigma when
    the prediction carries no transform. The transform-space spread is what
    the Monte-Carlo passes disagree by before any inverse mapping, and under
    a log-like output transform it tracks relative rather than absolute
    error, which is the quantity the percentage metrics penalize. Reported
    sharpness stays in original units regardless.
    """
    lat = getattr(preds, "latent_var", None)
    if lat is not None:
        return np.sqrt(np.asarray(lat, dtype=float))
    return preds.std


def predict_set(model, X: np.ndarray, T: int = 30,
                seed: int | None = None) -> PredictionSet:
    """Uniform batch-prediction front door over the model families.

    Accepts a dropout network, a variational GP, or any callable mapping an
    input matrix to a PredictionSet.
    """
    from . import bnn as bnn_mod
    from . import svgp as svgp_mod

    if isinstance(model, bnn_mod.BnnModel):
        return bnn_mod.predict_mc(model, X, T=T, seed=seed)
    if isinstance(model, svgp_mod.SvgpModel):
        return svgp_mod.predict(model, X)
    if callable(model):
        return model(X)
    raise InvalidArgumentError(f"cannot predict with {type(model).__name__}")


@dataclass
class OutputEvaluation:
    name: str
    r2: float
    mape: float
    ape90: float
    zero_excluded: int
    calibration: CalibrationCurve
    centered_levels: np.ndarray
    centered_coverage: np.ndarray
    sharpness: float
    sigma_mean: float
    sigma_sd: float
    discard: dict[str, DiscardCurve]
    random_band: dict[str, dict[str, np.ndarray]]

    def to_dict(self) -> dict:
        return {
            "name": self.name, "r2": self.r2, "mape": self.mape,
            "ape90": self.ape90, "zero_excluded": self.zero_excluded,
            "calibration": self.calibration.to_dict(),
            "centered_levels": self.centered_levels.tolist(),
            "centered_coverage": self.centered_coverage.tolist(),
            "sharpness": self.sharpness,
            "sigma_mean": self.sigma_mean, "sigma_sd": self.sigma_sd,
            "discard": {k: v.to_dict() for k, v in self.discard.items()},
            "random_band": {k: {kk: vv.tolist() for kk, vv in v.items()}
                            for k, v in self.random_band.items()},
        }


@dataclass
class EvaluationReport:
    model_id: str
    n_test: int
    mc_samples: int
    seed: int
    per_output: dict[str, OutputEvaluation]
    pooled_calibration: CalibrationCurve
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id, "n_test": self.n_test,
            "mc_samples": self.mc_samples, "seed": self.seed,
            "per_output": {k: v.to_dict() for k, v in self.per_output.items()},
            "pooled_calibration": self.pooled_calibration.to_dict(),
            "metadata": self.metadata,
        }


def evaluate(model, ds: Dataset, T: int = 30, seed: int = 0,
             model_id: str = "model") -> EvaluationReport:
    """Full metric sweep of a model on a test dataset.

    Predicts once, then computes per-output accuracy, calibration (plus the
    pooled curve over all outputs), sharpness, and discard curves for both
    percentage metrics with a random-baseline Monte-Carlo band.
    """
    preds = predict_set(model, ds.X, T=T, seed=seed)
    rank_sig = ranking_sigma(preds)
    Y = ds.Y
    per_output: dict[str, OutputEvaluation] = {}
    for j, name in enumerate(ds.output_names):
        y, yh = Y[:, j], preds.mean[:, j]
        sig = preds.std[:, j]
        cal = calibration_curve(preds, Y, output=j)
        c_lv, c_cov = centered_coverage(cal.levels, cal.observed)
        valid = y != 0.0
        ape_vals = np.abs(y[valid] - yh[valid]) / np.abs(y[valid]) * 100.0
        discard = {}
        band = {}
        for metric in ("mape", "ape90"):
            discard[metric] = discard_curve(ape_vals, rank_sig[valid, j],
                                            metric=metric, seed=seed)
            band[metric] = random_discard_band(ape_vals, metric=metric,
                                               seed=seed + 1)
        per_output[name] = OutputEvaluation(
            name=name, r2=r2(y, yh), mape=mape(y, yh),
            ape90=ape_percentile(y, yh, 90.0),
            zero_excluded=zero_excluded_count(y),
            calibration=cal, centered_levels=c_lv, centered_coverage=c_cov,
            sharpness=cal.sharpness,
            sigma_mean=float(sig.mean()), sigma_sd=float(sig.std()),
            discard=discard, random_band=band)
    pooled = calibration_curve(preds, Y, output=None)
    meta = {
        "uncertainty_units": "original",
        "discard_ranking_space": ("model output (standardized transform)"
                                  if preds.latent_var is not None
                                  else "original"),
        "sharpness_definition": "variance of predicted standard deviations",
        "calibration_space": ("transformed (Box-Cox latent)"
                              if preds.boxcox is not None else "original"),
        "percentile_method": "linear interpolation",
    }
    return EvaluationReport(model_id, ds.n, preds.mc_samples_used, seed,
                            per_output, pooled, meta)


def write_report_files(report: EvaluationReport, out_dir: str,
                       prefix: str = "eval") -> list[str]:
    """Persist the JSON report plus one flat CSV per curve; returns paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    jpath = os.path.join(out_dir, f"{prefix}_report.json")
    with open(jpath, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
    paths.append(jpath)

    acc = os.path.join(out_dir, f"{prefix}_accuracy.csv")
    with open(acc, "w", encoding="utf-8") as fh:
        fh.write("output,r2,mape,ape90,zero_excluded,sharpness,sigma_mean,sigma_sd\n")
        for name, ev in report.per_output.items():
            fh.write(f"{name},{ev.r2!r},{ev.mape!r},{ev.ape90!r},"
                     f"{ev.zero_excluded},{ev.sharpness!r},{ev.sigma_mean!r},"
                     f"{ev.sigma_sd!r}\n")
    paths.append(acc)

    for name, ev in report.per_output.items():
        cpath = os.path.join(out_dir, f"{prefix}_calibration_{name}.csv")
        with open(cpath, "w", encoding="utf-8") as fh:
            fh.write("level,observed\n")
            for lv, ob in zip(ev.calibration.levels, ev.calibration.observed):
                fh.write(f"{lv!r},{ob!r}\n")
        paths.append(cpath)
        for metric, curve in ev.discard.items():
            dpath = os.path.join(out_dir, f"{prefix}_discard_{name}_{metric}.csv")
            band = ev.random_band[metric]
            with open(dpath, "w", encoding="utf-8") as fh:
                fh.write("retained_fraction,by_uncertainty,by_oracle,random,"
                         "band_low5,band_mean,band_high95\n")
                for i, f in enumerate(curve.retained_fractions):
                    fh.write(f"{f!r},{curve.error_by_uncertainty[i]!r},"
                             f"{curve.error_by_oracle[i]!r},"
                             f"{curve.error_random[i]!r},"
                             f"{band['low5'][i]!r},{band['mean'][i]!r},"
                             f"{band['high95'][i]!r}\n")
            paths.append(dpath)

    pooled = os.path.join(out_dir, f"{prefix}_calibration_pooled.csv")
    with open(pooled, "w", encoding="utf-8") as fh:
        fh.write("level,observed\n")
        for lv, ob in zip(report.pooled_calibration.levels,
                          report.pooled_calibration.observed):
            fh.write(f"{lv!r},{ob!r}\n")
    paths.append(pooled)
    return paths
