"""Uncertainty-based routing between the surrogate and the simulator.

A threshold policy holds one standard-deviation threshold per output, fit as
a percentile of surrogate uncertainties over a reference set. Thresholds and
the sigmas they gate live in the same space: the model's own output space
(the standardized transform space) when the model has one, original units
otherwise — see ``evaluation.ranking_sigma``. At query time the surrogate
answers immediately; if the predicted uncertainty strictly exceeds the
threshold the point is flagged for an authoritative simulator run.
``evaluate_routing`` quantifies the accuracy/cost trade of that policy on a
labeled test set.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .design import Dataset
from .errors import InvalidArgumentError
from .evaluation import predict_set, ranking_sigma, zero_excluded_count
from .predictive import PredictiveDistribution

AGGREGATIONS = ("any-output-exceeds", "specific-output")


@dataclass(frozen=True)
class ThresholdPolicy:
    """Per-output routing thresholds in the model's ranking-sigma space."""

    thresholds: np.ndarray          # (n_outputs,)
    percentile: float
    aggregation: str = "any-output-exceeds"
    monitor_output: int | None = None
    output_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        t = np.asarray(self.thresholds, dtype=float)
        object.__setattr__(self, "thresholds", t)
        if np.any(t < 0):
            raise InvalidArgumentError("thresholds must be >= 0")
        if not 0.0 < self.percentile <= 100.0:
            raise InvalidArgumentError("percentile must be in (0, 100]")
        if self.aggregation not in AGGREGATIONS:
            raise InvalidArgumentError(f"unknown aggregation {self.aggregation!r}")
        if self.aggregation == "specific-output":
            if self.monitor_output is None or not 0 <= self.monitor_output < t.size:
                raise InvalidArgumentError("specific-output needs a valid monitor_output")

    def to_dict(self) -> dict:
        return {"thresholds": self.thresholds.tolist(),
                "percentile": self.percentile,
                "aggregation": self.aggregation,
                "monitor_output": self.monitor_output,
                "output_names": list(self.output_names)}

    @classmethod
    def from_dict(cls, d: dict) -> "ThresholdPolicy":
        return cls(np.asarray(d["thresholds"], dtype=float), d["percentile"],
                   d.get("aggregation", "any-output-exceeds"),
                   d.get("monitor_output"), list(d.get("output_names", [])))


def fit_threshold(uncertainties: np.ndarray, percentile: float = 90.0,
                  aggregation: str = "any-output-exceeds",
                  monitor_output: int | None = None,
                  output_names: list[str] | None = None) -> ThresholdPolicy:
    """Fit per-output thresholds as a percentile of reference uncertainties.

    Percentiles use linear interpolation between order statistics, e.g. the
    90th percentile of 1..100 is 90.1.
    """
    u = np.atleast_2d(np.asarray(uncertainties, dtype=float))
    if u.shape[0] < 2:
        raise InvalidArgumentError("need at least 2 reference points to fit thresholds")
    if np.any(u < 0):
        raise InvalidArgumentError("uncertainties must be >= 0")
    thr = np.percentile(u, percentile, axis=0)
    return ThresholdPolicy(thr, float(percentile), aggregation, monitor_output,
                           list(output_names) if output_names else [])


@dataclass
class RoutingDecision:
    estimate: PredictiveDistribution
    routed: bool
    triggering_outputs: list[str]
    status: str                     # retained | pending-simulation | done | degraded
    authoritative: dict | None = None

    def to_dict(self) -> dict:
        return {"estimate": {"mean": self.estimate.mean.tolist(),
                             "std": self.estimate.std.tolist(),
                             "units": list(self.estimate.units)},
                "routed": self.routed,
                "triggering_outputs": list(self.triggering_outputs),
                "status": self.status,
                "authoritative": self.authoritative}


def _monitored(policy: ThresholdPolicy, n_outputs: int) -> list[int]:
    if policy.aggregation == "specific-output":
        return [policy.monitor_output]
    return list(range(n_outputs))


def route(policy: ThresholdPolicy, model, x: np.ndarray,
          simulator=None, T: int = 30,
          seed: int | None = None) -> RoutingDecision:
    """Answer one query, escalating to the simulator when too uncertain.

    The surrogate estimate is always returned. An output triggers routing iff
    its predicted standard deviation strictly exceeds its threshold (exact
    equality is retained). With a simulator handle the authoritative run
    happens inline; a simulator failure degrades the decision back to the
    surrogate estimate with ``status="degraded"`` rather than raising.
    """
    x = np.asarray(x, dtype=float)
    ps = predict_set(model, x.reshape(1, -1), T=T, seed=seed)
    est = ps.point(0)
    sd = ranking_sigma(ps)[0]
    if sd.size != policy.thresholds.size:
        raise InvalidArgumentError("policy and model disagree on output count")
    names = policy.output_names or ps.output_names
    trig = [names[j] for j in _monitored(policy, sd.size)
            if sd[j] > policy.thresholds[j]]
    if not trig:
        return RoutingDecision(est, False, [], "retained")
    if simulator is None:
        return RoutingDecision(est, True, trig, "pending-simulation")
    try:
        out = simulator(x)
    except Exception as exc:  # noqa: BLE001 - availability over purity here
        warnings.warn(f"simulator failed; keeping surrogate estimate: {exc}",
                      RuntimeWarning, stacklevel=2)
        return RoutingDecision(est, True, trig, "degraded")
    if not isinstance(out, dict):
        out = {n: float(v) for n, v in zip(names, np.asarray(out, dtype=float))}
    return RoutingDecision(est, True, trig, "done", out)


@dataclass
class RoutingReport:
    model_id: str
    n_test: int
    percentiles: list[float]
    per_percentile: dict[str, dict]
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"model_id": self.model_id, "n_test": self.n_test,
                "percentiles": list(self.percentiles),
                "per_percentile": self.per_percentile,
                "metadata": self.metadata}


def _pct_metrics(y: np.ndarray, yh: np.ndarray) -> tuple[float | None, float | None, int]:
    """(mape, ape90, zero_excluded) over one retained set; None when undefined."""
    valid = y != 0.0
    excluded = int((~valid).sum())
    if not valid.any():
        return None, None, excluded
    ape = np.abs(y[valid] - yh[valid]) / np.abs(y[valid]) * 100.0
    return float(ape.mean()), float(np.percentile(ape, 90.0)), excluded


def _reduction(full: float | None, after: float | None):
    """Relative error reduction; 'not-applicable' when the baseline is zero."""
    if full is None or after is None:
        return "not-applicable"
    if full == 0.0:
        return "not-applicable" if after == 0.0 else -np.inf
    return (full - after) / full


def evaluate_routing(model, ds: Dataset, percentiles=(90.0, 80.0),
                     T: int = 30, seed: int = 0, latency_s: float | None = None,
                     reference_sigma: np.ndarray | None = None,
                     model_id: str = "model") -> RoutingReport:
    """Routing trade-off study over a labeled test set.

    For each threshold percentile, per-output accounting routes on that
    output's uncertainty alone: points whose sigma strictly exceeds the
    threshold are sent to the simulator, and the percentage metrics are
    recomputed on what the surrogate retains (zero targets re-excluded on the
    retained set). The any-output aggregate drives the cost line: routed
    count times the configured per-run latency.

    Thresholds are fit on this same test set unless ``reference_sigma``
    (ranking-space sigmas from a held-out reference set, matching
    ``evaluation.ranking_sigma``) is given; the self-fit shortcut is flagged
    as optimistic in the report metadata.
    """
    preds = predict_set(model, ds.X, T=T, seed=seed)
    sig = ranking_sigma(preds)
    Y = ds.Y
    fit_sig = sig if reference_sigma is None else np.atleast_2d(
        np.asarray(reference_sigma, dtype=float))
    if latency_s is None:
        latency_s = float(ds.meta.get("reference_run_seconds", 0.0))
    per_pct: dict[str, dict] = {}
    for pct in percentiles:
        policy = fit_threshold(fit_sig, percentile=pct,
                               output_names=ds.output_names)
        per_output = {}
        for j, name in enumerate(ds.output_names):
            routed = sig[:, j] > policy.thresholds[j]
            kept = ~routed
            m_full, a_full, ex_full = _pct_metrics(Y[:, j], preds.mean[:, j])
            if kept.sum() == 0:
                m_after, a_after, ex_after = None, None, 0
            else:
                m_after, a_after, ex_after = _pct_metrics(Y[kept, j],
                                                          preds.mean[kept, j])
            per_output[name] = {
                "threshold": float(policy.thresholds[j]),
                "fraction_routed": float(routed.mean()),
                "mape_full": m_full, "mape_after": m_after,
                "mape_reduction": _reduction(m_full, m_after),
                "ape90_full": a_full, "ape90_after": a_after,
                "ape90_reduction": _reduction(a_full, a_after),
                "zero_excluded_full": ex_full,
                "zero_excluded_after": ex_after,
            }
        routed_any = np.zeros(ds.n, dtype=bool)
        for j in range(sig.shape[1]):
            routed_any |= sig[:, j] > policy.thresholds[j]
        n_routed = int(routed_any.sum())
        per_pct[f"p{pct:g}"] = {
            "per_output": per_output,
            "any_output": {"fraction_routed": float(routed_any.mean()),
                           "routed_count": n_routed,
                           "simulated_time_s": n_routed * latency_s},
            "thresholds": policy.thresholds.tolist(),
        }
    meta = {"threshold_reference": ("self (test set; optimistic)"
                                    if reference_sigma is None else "held-out"),
            "latency_s": latency_s,
            "aggregation_note": "per-output rows route on that output alone; "
                                "cost line uses any-output-exceeds"}
    return RoutingReport(model_id, ds.n, [float(p) for p in percentiles],
                         per_pct, meta)
