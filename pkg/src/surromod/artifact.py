"""Model artifacts and run manifests.

Models serialize to a single self-describing JSON file: arrays are base64
float64 (little-endian, C order) with explicit shapes, so a file round-trips
bit-exactly and stays diffable at the metadata level. A run manifest lists
every file a pipeline run produced together with its SHA-256 content hash;
timestamps live only in the manifest, never inside report files, so repeated
seeded runs produce hash-identical reports.
"""
from __future__ import annotations

import base64
import hashlib
import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__ as TOOL_VERSION
from .bnn import BnnArchitecture, BnnModel
from .errors import ArtifactFormatError, InvalidArgumentError
from .svgp import SvgpBlock, SvgpModel
from .transforms import TransformPipeline

FORMAT_NAME = "surromod-model"
FORMAT_VERSION = 1


def _enc(a: np.ndarray) -> dict:
    a = np.ascontiguousarray(np.asarray(a, dtype="<f8"))
    return {"shape": list(a.shape),
            "data": base64.b64encode(a.tobytes()).decode("ascii")}


def _dec(d: dict) -> np.ndarray:
    raw = base64.b64decode(d["data"])
    return np.frombuffer(raw, dtype="<f8").reshape(d["shape"]).copy()


def _pipeline_dict(p: TransformPipeline | None) -> dict | None:
    return None if p is None else p.to_dict()


def _pipeline_from(d: dict | None) -> TransformPipeline | None:
    return None if d is None else TransformPipeline.from_dict(d)


def save_model(model, path: str, model_id: str | None = None) -> str:
    """Write a BNN or SVGP model to a JSON artifact; returns the path."""
    if isinstance(model, BnnModel):
        doc = {
            "family": "bnn",
            "architecture": {
                "n_inputs": model.arch.n_inputs,
                "n_outputs": model.arch.n_outputs,
                "hidden_layers": list(model.arch.hidden_layers),
                "activation_slope": model.arch.activation_slope,
                "dropout_p": model.arch.dropout_p,
                "dropout_inputs": model.arch.dropout_inputs,
            },
            "weights": [_enc(W) for W in model.weights],
            "biases": [_enc(b) for b in model.biases],
            "train_log": list(map(float, model.train_log)),
        }
    elif isinstance(model, SvgpModel):
        doc = {
            "family": "svgp",
            "blocks": [{
                "kind": b.kind,
                "log_variance": _enc(b.log_variance),
                "log_lengthscales": _enc(b.log_lengthscales),
                "Z": _enc(b.Z),
                "m_u": _enc(b.m_u),
                "L_strict": _enc(b.L_strict),
                "log_diag": _enc(b.log_diag),
                "noise_var": b.noise_var,
                "log": list(map(float, b.log)),
            } for b in model.blocks],
        }
    else:
        raise InvalidArgumentError(f"cannot serialize {type(model).__name__}")
    doc.update({
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "model_id": model_id or f"{doc['family']}-{model.seed}",
        "seed": model.seed,
        "output_names": model.output_names,
        "units": model.units,
        "pipeline": _pipeline_dict(model.pipeline),
    })
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)
    return path


def load_model(path: str):
    """Load a model artifact; returns (model, model_id)."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != FORMAT_NAME:
        raise ArtifactFormatError(f"{path} is not a model artifact")
    if doc.get("format_version") != FORMAT_VERSION:
        raise ArtifactFormatError(
            f"unsupported artifact version {doc.get('format_version')}")
    common = dict(pipeline=_pipeline_from(doc["pipeline"]), seed=doc["seed"],
                  output_names=doc["output_names"], units=doc["units"])
    if doc["family"] == "bnn":
        a = doc["architecture"]
        arch = BnnArchitecture(a["n_inputs"], a["n_outputs"],
                               tuple(a["hidden_layers"]), a["activation_slope"],
                               a["dropout_p"], a["dropout_inputs"])
        model = BnnModel(arch, [_dec(w) for w in doc["weights"]],
                         [_dec(b) for b in doc["biases"]],
                         train_log=list(doc["train_log"]), **common)
    elif doc["family"] == "svgp":
        blocks = [SvgpBlock(b["kind"], _dec(b["log_variance"]),
                            _dec(b["log_lengthscales"]), _dec(b["Z"]),
                            _dec(b["m_u"]), _dec(b["L_strict"]),
                            _dec(b["log_diag"]), b["noise_var"],
                            log=list(b["log"]))
                  for b in doc["blocks"]]
        model = SvgpModel(blocks, **common)
    else:
        raise ArtifactFormatError(f"unknown model family {doc['family']!r}")
    return model, doc["model_id"]


def file_sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    """Registry of everything one pipeline run produced.

    ``artifacts`` maps run-relative paths to {sha256, role}; seeds and the
    config echo make the run reproducible from the manifest alone.
    """

    seeds: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)
    tool_version: str = TOOL_VERSION
    created_utc: str = ""

    def add(self, path: str, role: str, base_dir: str | None = None) -> None:
        rel = os.path.relpath(path, base_dir) if base_dir else path
        self.artifacts[rel] = {"sha256": file_sha256(path), "role": role}

    def write(self, path: str) -> str:
        doc = {"seeds": self.seeds, "config": self.config,
               "artifacts": self.artifacts, "tool_version": self.tool_version,
               "created_utc": self.created_utc
               or datetime.now(timezone.utc).isoformat()}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
        return path

    @classmethod
    def read(cls, path: str) -> "RunManifest":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls(doc["seeds"], doc["config"], doc["artifacts"],
                   doc["tool_version"], doc["created_utc"])
