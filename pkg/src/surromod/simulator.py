"""Closed-form synthetic building-energy model.

Stands in for a full dynamic simulation: a steady-state annual balance with
deliberate kinks (``max(0, .)``) and a step in the heating fuel split at
``fuel_mix = 0.5``. Those non-smooth features are what make the heating
supply outputs hard to emulate, mirroring where real surrogate errors
concentrate. Deterministic; an optional artificial per-row latency emulates
the cost of a real simulator run.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, fields

import numpy as np

from .design import Dataset, DesignSpace, Parameter, lhs_sample
from .errors import InvalidArgumentError

OUTPUT_NAMES = ["heating_demand", "cooling_demand", "heating_gas",
                "heating_elec", "fans", "pv_generation"]
OUTPUT_UNITS = {name: "MWh/yr" for name in OUTPUT_NAMES}
# which direction is "better" for each output, used by downstream consumers
OUTPUT_DIRECTIONS = {name: ("max" if name == "pv_generation" else "min")
                     for name in OUTPUT_NAMES}

# metadata only: cost of one run of the real simulator this model stands in for
REFERENCE_RUN_SECONDS = 130.0


@dataclass(frozen=True)
class BuildingConstants:
    """Fixed geometry and climate aggregates."""

    A_w: float = 800.0     # facade area, m^2
    A_r: float = 600.0     # roof area, m^2
    A_f: float = 1800.0    # floor area, m^2
    V: float = 6000.0      # volume, m^3
    HDH: float = 90000.0   # heating degree-hours, Kh
    CDH: float = 20000.0   # cooling degree-hours, Kh
    H_hrs: float = 3000.0  # heating-season occupied hours
    C_hrs: float = 1500.0  # cooling-season occupied hours
    S: float = 350.0       # solar irradiation on facade, kWh/m^2 yr
    Y_pv: float = 180.0    # PV yield, kWh/m^2 yr

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "BuildingConstants":
        return cls(**{k: float(v) for k, v in d.items()})


_PARAM_DEFS = [
    ("u_wall", 0.1, 1.0, "W/m2K"),
    ("u_roof", 0.1, 0.6, "W/m2K"),
    ("u_win", 0.8, 3.0, "W/m2K"),
    ("wwr", 0.1, 0.9, "-"),
    ("ach", 0.1, 1.5, "1/h"),
    ("gains", 5.0, 25.0, "W/m2"),
    ("hrv", 0.0, 0.9, "-"),
    ("shgc", 0.2, 0.8, "-"),
    ("pv_frac", 0.0, 0.5, "-"),
    ("fuel_mix", 0.0, 1.0, "-"),
]

INPUT_NAMES = [p[0] for p in _PARAM_DEFS]


def default_space() -> DesignSpace:
    """The 10-parameter envelope/systems design space."""
    return DesignSpace(tuple(Parameter(*p) for p in _PARAM_DEFS))


def _check_bounds(x: np.ndarray, space: DesignSpace) -> None:
    lo, up = space.lower, space.upper
    for j, name in enumerate(space.names):
        bad = (x[..., j] < lo[j]) | (x[..., j] > up[j])
        if np.any(bad):
            raise InvalidArgumentError(
                f"parameter {name!r} outside [{lo[j]}, {up[j]}]"
            )


def simulate(x, constants: BuildingConstants | None = None) -> dict[str, float]:
    """Annual energy balance for one parameter vector.

    Parameters
    ----------
    x : array-like of length 10 or mapping name -> value, in the order of
        ``INPUT_NAMES``.

    Returns
    -------
    dict mapping output name to MWh/yr.
    """
    if isinstance(x, dict):
        missing = [n for n in INPUT_NAMES if n not in x]
        if missing:
            raise InvalidArgumentError(f"missing parameter {missing[0]!r}")
        x = np.array([x[n] for n in INPUT_NAMES], dtype=float)
    x = np.asarray(x, dtype=float)
    y = simulate_batch(x[None, :], constants)[0]
    return dict(zip(OUTPUT_NAMES, y.tolist()))


def simulate_batch(X: np.ndarray, constants: BuildingConstants | None = None,
                   latency_s: float = 0.0) -> np.ndarray:
    """Row-wise annual balance; returns (n, 6) in MWh/yr.

    ``latency_s`` sleeps that long per row to emulate simulation cost.
    """
    c = constants or BuildingConstants()
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != len(INPUT_NAMES):
        raise InvalidArgumentError(
            f"expected (n, {len(INPUT_NAMES)}) inputs, got {X.shape}"
        )
    _check_bounds(X, default_space())
    (u_wall, u_roof, u_win, wwr, ach, gains, hrv, shgc, pv_frac,
     fuel_mix) = (X[:, j] for j in range(10))

    UA = c.A_w * (1.0 - wwr) * u_wall + c.A_w * wwr * u_win + c.A_r * u_roof
    inf = 0.33 * ach * c.V * (1.0 - hrv)
    solar = c.S * c.A_w * wwr * shgc
    q_heat = np.maximum(
        0.0,
        (UA + inf) * c.HDH * 1e-3 - 0.6 * solar
        - 0.8 * gains * c.A_f * c.H_hrs * 1e-3,
    )
    q_cool = np.maximum(
        0.0,
        (UA + inf) * c.CDH * 1e-3 * 0.3 + 0.4 * solar
        + gains * c.A_f * c.C_hrs * 1e-3 - 50.0 * (1.0 - wwr) * c.A_w,
    )
    gas_branch = fuel_mix > 0.5
    heating_gas = np.where(gas_branch, q_heat * fuel_mix / 0.92, 0.0)
    heating_elec = np.where(gas_branch, q_heat * (1.0 - fuel_mix) / 3.0,
                            q_heat / 3.0)
    fans = (0.02 * q_cool + 0.01 * q_heat) * (1.0 + 0.5 * ach)
    pv = c.Y_pv * c.A_r * pv_frac

    Y = np.column_stack([q_heat, q_cool, heating_gas, heating_elec, fans, pv])
    Y *= 1e-3  # kWh -> MWh
    if latency_s > 0:
        for _ in range(X.shape[0]):
            time.sleep(latency_s)
    return Y


def generate_dataset(space: DesignSpace | None = None, n: int = 100,
                     seed: int = 0, constants: BuildingConstants | None = None,
                     latency_s: float = 0.0) -> Dataset:
    """LHS design plus simulated outputs, tagged with provenance metadata."""
    space = space or default_space()
    c = constants or BuildingConstants()
    if n == 0:
        X = np.empty((0, space.dim))
        Y = np.empty((0, len(OUTPUT_NAMES)))
    else:
        X = lhs_sample(space, n, seed)
        Y = simulate_batch(X, c, latency_s=latency_s)
    return Dataset(X, Y, space.names, list(OUTPUT_NAMES), space,
                   meta={"seed": seed, "constants": c.to_dict(),
                         "output_units": OUTPUT_UNITS,
                         "reference_run_seconds": REFERENCE_RUN_SECONDS})
