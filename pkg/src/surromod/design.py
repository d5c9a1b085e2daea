"""Design space definition and space-filling experiment designs.

The design space is an ordered list of continuous parameters with bounds and
units. Designs are drawn with Latin hypercube sampling: one sample per
equal-width bin in every dimension, with independently permuted bins and a
uniform jitter inside each bin.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, InvalidSpaceError


@dataclass(frozen=True)
class Parameter:
    """One continuous design parameter."""

    name: str
    lower: float
    upper: float
    unit: str = ""


@dataclass(frozen=True)
class DesignSpace:
    """Ordered collection of continuous parameters.

    Raises
    ------
    InvalidSpaceError
        If any parameter has lower >= upper, a duplicate name, or an
        empty name.
    """

    params: tuple[Parameter, ...]

    def __post_init__(self):
        if len(self.params) == 0:
            raise InvalidSpaceError("design space needs at least one parameter")
        seen = set()
        for p in self.params:
            if not p.name:
                raise InvalidSpaceError("parameter names must be non-empty")
            if p.name in seen:
                raise InvalidSpaceError(f"duplicate parameter name {p.name!r}")
            seen.add(p.name)
            if not p.lower < p.upper:
                raise InvalidSpaceError(
                    f"parameter {p.name!r}: lower ({p.lower}) must be < upper ({p.upper})"
                )

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.params]

    @property
    def dim(self) -> int:
        return len(self.params)

    @property
    def lower(self) -> np.ndarray:
        return np.array([p.lower for p in self.params], dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.array([p.upper for p in self.params], dtype=float)

    @property
    def units(self) -> list[str]:
        return [p.unit for p in self.params]

    def contains(self, x: np.ndarray) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def to_dict(self) -> dict:
        return {
            "params": [
                {"name": p.name, "lower": p.lower, "upper": p.upper, "unit": p.unit}
                for p in self.params
            ]
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DesignSpace":
        return cls(tuple(Parameter(p["name"], float(p["lower"]), float(p["upper"]),
                                   p.get("unit", "")) for p in d["params"]))


def save_space(space: DesignSpace, path: str) -> None:
    """Write a design space as a declarative JSON config."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(space.to_dict(), fh, indent=2)


def load_space(path: str) -> DesignSpace:
    with open(path, encoding="utf-8") as fh:
        return DesignSpace.from_dict(json.load(fh))


def lhs_sample(space: DesignSpace, n: int, seed: int, mode: str = "jitter") -> np.ndarray:
    """Latin hypercube sample of the design space.

    Each dimension of ``[lower, upper]`` is cut into ``n`` equal-width bins;
    every bin receives exactly one sample. Bin order is an independent random
    permutation per dimension and the within-bin position is uniform
    (``mode="jitter"``, the default) or the bin centre (``mode="midpoint"``).
    The result is a pure function of ``(space, n, seed, mode)``.

    Parameters
    ----------
    space : DesignSpace
    n : int
        Number of samples, >= 1.
    seed : int
        Seed for the pseudo-random generator.
    mode : str
        "jitter" or "midpoint".

    Returns
    -------
    ndarray of shape (n, d), samples in original units with
    ``lower <= x < upper`` per dimension.
    """
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    if mode not in ("jitter", "midpoint"):
        raise InvalidArgumentError(f"unknown LHS mode {mode!r}")
    rng = np.random.default_rng(seed)
    d = space.dim
    out = np.empty((n, d), dtype=float)
    lower, upper = space.lower, space.upper
    for j in range(d):
        perm = rng.permutation(n)
        if mode == "jitter":
            u = rng.random(n)
        else:
            u = np.full(n, 0.5)
        out[:, j] = lower[j] + (perm + u) / n * (upper[j] - lower[j])
    return out


@dataclass
class Dataset:
    """Paired simulation inputs and outputs in original units."""

    X: np.ndarray
    Y: np.ndarray
    input_names: list[str]
    output_names: list[str]
    space: DesignSpace | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.Y = np.asarray(self.Y, dtype=float)
        if self.X.shape[0] != self.Y.shape[0]:
            raise InvalidArgumentError(
                f"X has {self.X.shape[0]} rows but Y has {self.Y.shape[0]}"
            )
        if self.X.shape[1] != len(self.input_names):
            raise InvalidArgumentError("X column count does not match input_names")
        if self.Y.shape[1] != len(self.output_names):
            raise InvalidArgumentError("Y column count does not match output_names")
        if self.space is not None:
            lo, up = self.space.lower, self.space.upper
            if np.any(self.X < lo) or np.any(self.X > up):
                raise InvalidArgumentError("dataset rows fall outside the tagged space")

    @property
    def n(self) -> int:
        return self.X.shape[0]


def split_train_test(ds: Dataset, n_test: int, seed: int) -> tuple[Dataset, Dataset]:
    """Split a dataset into disjoint train/test parts with a seeded shuffle."""
    if not 0 < n_test < ds.n:
        raise InvalidArgumentError(
            f"n_test must be in (0, {ds.n}), got {n_test}"
        )
    rng = np.random.default_rng(seed)
    order = rng.permutation(ds.n)
    test_idx, train_idx = order[:n_test], order[n_test:]

    def take(idx):
        return Dataset(ds.X[idx], ds.Y[idx], list(ds.input_names),
                       list(ds.output_names), ds.space, dict(ds.meta))

    return take(train_idx), take(test_idx)


def save_dataset(ds: Dataset, path: str, sidecar: bool = True) -> None:
    """Write a dataset as CSV (inputs then outputs) plus a JSON sidecar.

    The sidecar ``<path>.meta.json`` carries the design space and any
    metadata recorded at generation time (seed, simulator constants).
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(ds.input_names) + list(ds.output_names))
        for i in range(ds.n):
            w.writerow([repr(float(v)) for v in ds.X[i]]
                       + [repr(float(v)) for v in ds.Y[i]])
    if sidecar:
        meta = dict(ds.meta)
        if ds.space is not None:
            meta["space"] = ds.space.to_dict()
        meta["input_names"] = list(ds.input_names)
        meta["output_names"] = list(ds.output_names)
        with open(path + ".meta.json", "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2)


def load_dataset(path: str, n_inputs: int | None = None) -> Dataset:
    """Load a dataset CSV written by :func:`save_dataset`.

    Column split between inputs and outputs comes from the sidecar when
    present, otherwise from ``n_inputs``.
    """
    import os

    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    meta: dict = {}
    space = None
    sidecar = path + ".meta.json"
    if os.path.exists(sidecar):
        with open(sidecar, encoding="utf-8") as fh:
            meta = json.load(fh)
        if "space" in meta:
            space = DesignSpace.from_dict(meta["space"])
        n_inputs = len(meta["input_names"])
    if n_inputs is None:
        raise InvalidArgumentError(
            "cannot infer the input/output column split: no sidecar and no n_inputs"
        )
    data = np.array([[float(v) for v in row] for row in body], dtype=float)
    X, Y = data[:, :n_inputs], data[:, n_inputs:]
    return Dataset(X, Y, header[:n_inputs], header[n_inputs:], space,
                   {k: v for k, v in meta.items()
                    if k not in ("space", "input_names", "output_names")})
