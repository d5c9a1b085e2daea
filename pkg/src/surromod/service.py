"""HTTP service: surrogate predictions, routing, on-demand simulation.

The service wraps one immutable loaded model plus an optional threshold
policy. Requests carry design-parameter maps which are validated against the
design-space bounds (400 names the offending field). Simulation jobs run on
a small worker pool behind a lock-guarded job table; configured latency above
a small threshold turns POST /simulate into an async job with polling.
"""
from __future__ import annotations

import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from . import __version__
from .design import DesignSpace
from .evaluation import predict_set, ranking_sigma
from .router import ThresholdPolicy, route
from .simulator import (OUTPUT_DIRECTIONS, OUTPUT_NAMES, OUTPUT_UNITS,
                        default_space, simulate)

ASYNC_LATENCY_THRESHOLD_S = 0.1


def _parse_point(body: dict, space: DesignSpace) -> np.ndarray:
    inputs = body.get("inputs")
    if not isinstance(inputs, dict):
        raise HTTPException(400, detail="body must contain an 'inputs' map")
    x = np.empty(space.dim)
    for j, name in enumerate(space.names):
        if name not in inputs:
            raise HTTPException(400, detail=f"missing input: {name}")
        try:
            v = float(inputs[name])
        except (TypeError, ValueError):
            raise HTTPException(400, detail=f"non-numeric input: {name}")
        lo, hi = space.lower[j], space.upper[j]
        if not (np.isfinite(v) and lo <= v <= hi):
            raise HTTPException(
                400, detail=f"out of bounds: {name}={v!r} not in [{lo}, {hi}]")
        x[j] = v
    extra = set(inputs) - set(space.names)
    if extra:
        raise HTTPException(400, detail=f"unknown input: {sorted(extra)[0]}")
    return x


class _JobTable:
    """Bounded worker pool with a lock-guarded job registry."""

    def __init__(self, latency_s: float, max_workers: int = 4):
        self.latency_s = latency_s
        self._jobs: dict[str, dict] = {}
        self._lock = threading.Lock()
        self._pool = ThreadPoolExecutor(max_workers=max_workers)

    def _run(self, job_id: str, x: np.ndarray) -> None:
        if self.latency_s > 0:
            time.sleep(self.latency_s)
        try:
            out = simulate(x)
            rec = {"status": "done", "outputs": out, "units": OUTPUT_UNITS}
        except Exception as exc:  # noqa: BLE001 - job boundary
            rec = {"status": "failed", "error": str(exc)}
        with self._lock:
            self._jobs[job_id].update(rec)

    def submit(self, x: np.ndarray) -> str:
        job_id = uuid.uuid4().hex
        with self._lock:
            self._jobs[job_id] = {"status": "pending", "job_id": job_id}
        self._pool.submit(self._run, job_id, x)
        return job_id

    def get(self, job_id: str) -> dict | None:
        with self._lock:
            rec = self._jobs.get(job_id)
            return dict(rec) if rec else None


def create_app(model=None, model_id: str | None = None,
               policy: ThresholdPolicy | None = None,
               space: DesignSpace | None = None,
               simulate_latency_s: float = 0.0,
               mc_samples: int = 30, mc_seed: int | None = None,
               cors_origins: str = "*") -> FastAPI:
    """Build the app around one loaded model (may be None: endpoints 503)."""
    space = space or default_space()
    jobs = _JobTable(simulate_latency_s)
    app = FastAPI(title="surromod", version=__version__)
    app.add_middleware(CORSMiddleware,
                       allow_origins=[o.strip() for o in cors_origins.split(",")],
                       allow_methods=["*"], allow_headers=["*"])
    app.state.jobs = jobs

    def _require_model():
        if model is None:
            raise HTTPException(503, detail="model not loaded")

    @app.get("/health")
    def health():
        return {"version": __version__, "model_loaded": model is not None}

    @app.get("/model")
    def model_info():
        _require_model()
        ps = getattr(model, "pipeline", None)
        arch = {}
        if hasattr(model, "arch"):
            arch = {"family": "bnn",
                    "hidden_layers": list(model.arch.hidden_layers),
                    "dropout_p": model.arch.dropout_p,
                    "mc_samples": mc_samples}
        elif hasattr(model, "blocks"):
            arch = {"family": "svgp",
                    "kernel": model.blocks[0].kind,
                    "n_inducing": int(model.blocks[0].m)}
        return {
            "model_id": model_id,
            "architecture": arch,
            "design_space": {
                "parameters": [{"name": p.name, "lower": p.lower,
                                "upper": p.upper, "unit": p.unit}
                               for p in space.params],
            },
            "outputs": [{"name": n, "unit": OUTPUT_UNITS[n],
                         "direction": OUTPUT_DIRECTIONS[n]}
                        for n in OUTPUT_NAMES],
            "threshold_policy": policy.to_dict() if policy else None,
            "simulate_latency_s": simulate_latency_s,
            "has_pipeline": ps is not None,
        }

    @app.post("/predict")
    def predict(body: dict):
        _require_model()
        x = _parse_point(body, space)
        ps = predict_set(model, x.reshape(1, -1), T=mc_samples, seed=mc_seed)
        # ranking_std lives in the same space as the threshold policy, so a
        # client can reproduce the routing comparison (strictly-greater) itself
        rk = ranking_sigma(ps)
        return {
            "outputs": {name: {"mean": float(ps.mean[0, j]),
                               "std": float(ps.std[0, j]),
                               "ranking_std": float(rk[0, j]),
                               "unit": ps.units[j]}
                        for j, name in enumerate(ps.output_names)},
            "mc_samples": ps.mc_samples_used,
            "model_id": model_id,
        }

    @app.post("/route")
    def route_endpoint(body: dict):
        _require_model()
        if policy is None:
            raise HTTPException(503, detail="routing policy not loaded")
        x = _parse_point(body, space)
        decision = route(policy, model, x, simulator=None, T=mc_samples,
                         seed=mc_seed)
        sim: dict = {"status": "not-needed"}
        if decision.routed:
            job_id = jobs.submit(x)
            rec = jobs.get(job_id)
            # zero-latency jobs usually finish before we answer; poll briefly
            deadline = time.monotonic() + 0.05
            while (rec["status"] == "pending"
                   and simulate_latency_s <= ASYNC_LATENCY_THRESHOLD_S
                   and time.monotonic() < deadline):
                time.sleep(0.002)
                rec = jobs.get(job_id)
            sim = {"status": rec["status"], "job_id": job_id}
            if rec["status"] == "done":
                sim["outputs"] = rec["outputs"]
        est = decision.estimate
        return {
            "estimate": {name: {"mean": float(est.mean[j]),
                                "std": float(est.std[j]),
                                "unit": est.units[j]}
                         for j, name in enumerate(OUTPUT_NAMES)},
            "routed": decision.routed,
            "triggering_outputs": decision.triggering_outputs,
            "simulation": sim,
            "model_id": model_id,
        }

    @app.post("/simulate")
    def simulate_endpoint(body: dict):
        x = _parse_point(body, space)
        if simulate_latency_s > ASYNC_LATENCY_THRESHOLD_S:
            job_id = jobs.submit(x)
            return {"status": "pending", "job_id": job_id}
        if simulate_latency_s > 0:
            time.sleep(simulate_latency_s)
        out = simulate(x)
        return {"status": "done", "outputs": out, "units": OUTPUT_UNITS}

    @app.get("/simulate/{job_id}")
    def job_status(job_id: str):
        rec = jobs.get(job_id)
        if rec is None:
            raise HTTPException(404, detail=f"unknown job: {job_id}")
        return rec

    return app
