"""Deterministic ODE integration and trajectory-level checks.

Two methods are available: classical fixed-step RK4 (the default) and an
adaptive Dormand-Prince 5(4) pair used as the reference. Vector fields are
autonomous callables ``f(state) -> dstate``; any leading batch axis in the
initial state is carried through, so ensembles integrate in one pass.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np

from .aggregate import (
    AggregateConstants,
    aggregate_vector_field,
    lyapunov,
    shifted_vector_field,
    to_aggregate,
)
from .errors import GridMismatch, NonFiniteState, StepUnderflow, ValidationError
from .model import NondimModel, ResourceParams, nondim_field, state_to_dimensional

MIN_STEP = 1e-14
METHODS = ("rk4", "rk45")


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk4"
    step: float = 1e-3
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    t_end: float = 50.0
    record_every: int = 1

    def __post_init__(self):
        problems = []
        if self.method not in METHODS:
            problems.append(("integrator.method", f"must be one of {METHODS}, got {self.method!r}"))
        if not self.step > 0:
            problems.append(("integrator.step", "must be > 0"))
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            problems.append(("integrator.abs_tol/rel_tol", "must be > 0"))
        if not self.t_end > 0:
            problems.append(("integrator.t_end", "must be > 0"))
        if int(self.record_every) != self.record_every or self.record_every < 1:
            problems.append(("integrator.record_every", "must be a positive integer"))
        if problems:
            raise ValidationError(problems)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def kind(self) -> str:
        return self.metadata.get("kind", "generic")

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def columns(self) -> list[str]:
        if "columns" in self.metadata:
            return list(self.metadata["columns"])
        return ["t"] + [f"s{i}" for i in range(self.states.shape[-1])]

    def to_csv(self, path) -> None:
        if self.states.ndim != 2:
            raise ValueError("CSV export needs a single (unbatched) trajectory")
        data = np.column_stack([self.times, self.states])
        with open(path, "w", newline="") as fh:
            fh.write(",".join(self.columns()) + "\n")
            np.savetxt(fh, data, fmt="%.17g", delimiter=",")


def _rk4_step(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _time_grid(h, t_end):
    n = round(t_end / h)
    if n >= 1 and abs(n * h - t_end) <= 1e-9 * h:
        return [k * h for k in range(n)] + [t_end]
    n = int(math.floor(t_end / h))
    return [k * h for k in range(n + 1)] + [t_end]


def _integrate_rk4(f, y0, config):
    grid = _time_grid(config.step, config.t_end)
    every = config.record_every
    times = [grid[0]]
    states = [y0]
    y = y0
    last = len(grid) - 1
    for k in range(last):
        y = _rk4_step(f, y, grid[k + 1] - grid[k])
        if not np.all(np.isfinite(y)):
            raise NonFiniteState(grid[k + 1])
        if (k + 1) % every == 0 or k + 1 == last:
            times.append(grid[k + 1])
            states.append(y)
    return times, states


# Dormand-Prince 5(4) tableau
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_DP_E = tuple(b - b4 for b, b4 in zip(_DP_B, _DP_B4))


def _integrate_rk45(f, y0, config):
    atol, rtol = config.abs_tol, config.rel_tol
    t, y = 0.0, y0
    t_end = config.t_end
    h = min(config.step, t_end)
    k1 = f(y)
    times, states = [t], [y]
    accepted = 0
    while t < t_end:
        if h < MIN_STEP:
            raise StepUnderflow(f"adaptive step {h:.3e} below {MIN_STEP:.0e} at t={t!r}")
        last = t + h >= t_end
        if last:
            h = t_end - t
        ks = [k1]
        for i in range(1, 7):
            yi = y + h * sum(a * k for a, k in zip(_DP_A[i], ks))
            ks.append(f(yi))
        y_new = y + h * sum(b * k for b, k in zip(_DP_B, ks) if b)
        err = h * sum(e * k for e, k in zip(_DP_E, ks))
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        with np.errstate(invalid="ignore"):
            err_norm = float(np.max(np.abs(err) / scale))
        if not np.isfinite(err_norm):
            h *= 0.2
            continue
        if err_norm <= 1.0:
            t = t_end if last else t + h
            y = y_new
            if not np.all(np.isfinite(y)):
                raise NonFiniteState(t)
            k1 = ks[6]
            accepted += 1
            if accepted % config.record_every == 0 or t >= t_end:
                times.append(t)
                states.append(y)
            fac = 5.0 if err_norm == 0 else min(5.0, 0.9 * err_norm ** -0.2)
        else:
            fac = max(0.2, 0.9 * err_norm ** -0.2)
        h *= fac
    return times, states


def integrate(field: Callable, initial, config: IntegratorConfig = IntegratorConfig(), metadata=None) -> Trajectory:
    """Integrate an autonomous field from ``t = 0`` to ``config.t_end``.

    Identical inputs give bit-identical output. Raises :class:`NonFiniteState`
    on overflow/NaN and :class:`StepUnderflow` when the adaptive step collapses.
    """
    y0 = np.array(initial, dtype=float)
    if not np.all(np.isfinite(y0)):
        raise NonFiniteState(0.0)
    if config.method == "rk4":
        times, states = _integrate_rk4(field, y0, config)
        meta = {"method": "rk4", "step": config.step}
    else:
        times, states = _integrate_rk45(field, y0, config)
        meta = {"method": "rk45", "abs_tol": config.abs_tol, "rel_tol": config.rel_tol}
    meta["t_end"] = config.t_end
    meta["record_every"] = config.record_every
    meta.update(metadata or {})
    return Trajectory(np.array(times), np.array(states), meta)


def model_fingerprint(model: NondimModel) -> str:
    h = hashlib.sha256()
    for a in (model.beta, model.nu, model.rho, model.eco_weight, model.weights.w):
        h.update(np.ascontiguousarray(a).tobytes())
    return h.hexdigest()[:16]


def simulate_full(model: NondimModel, initial, config: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Integrate the nondimensional ``[x, y...]`` system."""
    cols = ["t", "x"] + [f"y{i + 1}" for i in range(model.n)]
    return integrate(
        nondim_field(model),
        initial,
        config,
        {"kind": "full", "columns": cols, "model": model_fingerprint(model)},
    )


def simulate_aggregate(constants: AggregateConstants, initial, config: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Integrate the reduced ``[z, u]`` system."""
    return integrate(
        partial(aggregate_vector_field, constants=constants),
        initial,
        config,
        {"kind": "aggregate", "columns": ["t", "z", "u"], "K1": constants.K1, "K2": constants.K2},
    )


def simulate_shifted(constants: AggregateConstants, initial, config: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Integrate the shifted ``[v, w]`` system."""
    return integrate(
        partial(shifted_vector_field, constants=constants),
        initial,
        config,
        {"kind": "shifted", "columns": ["t", "v", "w"], "K1": constants.K1, "K2": constants.K2},
    )


def to_dimensional(traj: Trajectory, resource: ResourceParams) -> Trajectory:
    """Rescale a full nondimensional trajectory to ``tau``, ``R`` and ``e``."""
    if traj.kind != "full":
        raise ValueError("only full trajectories can be rescaled")
    n = traj.states.shape[-1] - 1
    meta = dict(traj.metadata, kind="dimensional", columns=["tau", "R"] + [f"e{i + 1}" for i in range(n)])
    return Trajectory(traj.times / resource.r, state_to_dimensional(traj.states, resource), meta)


def aggregate_consistency(full: Trajectory, aggregate: Trajectory) -> dict:
    """Max deviations ``|log x - z|`` and ``|sum y - u|`` over a shared grid."""
    if full.times.shape != aggregate.times.shape or not np.array_equal(full.times, aggregate.times):
        raise GridMismatch("full and aggregate trajectories are on different time grids")
    mapped = to_aggregate(full.states)
    dev = np.abs(mapped - aggregate.states)
    return {
        "max_log_deviation": float(np.max(dev[..., 0])),
        "max_sum_deviation": float(np.max(dev[..., 1])),
    }


@dataclass(frozen=True, eq=False)
class MonotonicityReport:
    values: np.ndarray
    violations: list
    max_increase: float
    tol: float

    @property
    def ok(self) -> bool:
        return not self.violations


def _shifted_states(traj: Trajectory, constants: AggregateConstants) -> np.ndarray:
    kind = traj.kind
    if kind == "shifted":
        return traj.states
    if kind == "full":
        agg = to_aggregate(traj.states)
    elif kind == "aggregate":
        agg = traj.states
    else:
        raise ValueError(f"cannot evaluate the Lyapunov function on a {kind!r} trajectory")
    return agg - np.array([constants.z0, constants.u0])


def lyapunov_monotonicity(traj: Trajectory, constants: AggregateConstants, tol: float = 1e-9) -> MonotonicityReport:
    """Evaluate V along a trajectory and list sample-to-sample increases above ``tol``.

    Works for full, aggregate or shifted trajectories (full ones are mapped
    through ``z = log x``, ``u = sum y``). Batched trajectories are checked
    member by member.
    """
    vw = _shifted_states(traj, constants)
    V = lyapunov(vw[..., 0], vw[..., 1], constants)
    inc = np.diff(V, axis=0)
    bad = np.argwhere(inc > tol)
    violations = [tuple(int(i) for i in idx) for idx in bad]
    max_inc = float(np.max(inc)) if inc.size else 0.0
    return MonotonicityReport(values=V, violations=violations, max_increase=max_inc, tol=tol)
