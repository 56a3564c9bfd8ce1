"""Aggregate reduction, equilibrium and Lyapunov certificate.

For a leaderless network the pair ``z = log x``, ``u = sum_i y_i`` obeys a
closed planar system

    z' = 1 - exp(z) - u
    u' = K1 (exp(z) - 1) - K2

with ``K1 = sum a_i`` and ``K2 = sum a_i (rho_i - 1)`` (``a_i`` the
ecological weight). Shifting to ``v = z - z0``, ``w = u - u0`` puts the
unique equilibrium at the origin, where

    V(v, w) = exp(v) - v - 1 + w**2 / (2 (K1 + K2))

decreases at rate ``-exp(z0) (exp(v) - 1)**2``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import (
    DegenerateRatio,
    DegenerateSum,
    IncompatibleEquilibrium,
    NumericalError,
    SingularBeyondKernel,
)
from .model import NEUTRAL_TOL, NondimModel, leaderless_residual, nondim_vector_field

RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class AggregateConstants:
    K1: float
    K2: float

    @property
    def ratio(self) -> float:
        return self.K2 / self.K1

    @property
    def x0(self) -> float:
        """``exp(z0) = 1 + K2/K1``."""
        return 1.0 + self.ratio

    @property
    def z0(self) -> float:
        if not self.x0 > 0:
            raise DegenerateRatio(f"K2/K1 + 1 = {self.x0!r} <= 0; no positive equilibrium")
        return math.log1p(self.ratio)

    @property
    def u0(self) -> float:
        return -self.ratio

    @property
    def lyapunov_weight(self) -> float:
        """``K1 + K2``, which must be positive for the shifted analysis."""
        s = self.K1 + self.K2
        if not s > 0:
            raise DegenerateSum(f"K1 + K2 = {s!r} <= 0")
        return s


@dataclass(frozen=True)
class AssumptionFlags:
    leaderless: bool
    leaderless_residual: float
    rho_in_range: bool
    rho_violations: tuple[int, ...] = ()

    @property
    def ok(self) -> bool:
        return self.leaderless and self.rho_in_range


def check_assumptions(model: NondimModel, tol: float = NEUTRAL_TOL) -> AssumptionFlags:
    """Report leaderlessness (within ``tol``) and ``rho_i`` in the open interval (0, 2)."""
    res = leaderless_residual(model)
    bad = tuple(int(i) for i in np.flatnonzero(~((model.rho > 0) & (model.rho < 2))))
    return AssumptionFlags(
        leaderless=res <= tol,
        leaderless_residual=res,
        rho_in_range=not bad,
        rho_violations=bad,
    )


def aggregate_constants(model: NondimModel) -> AggregateConstants:
    a = model.eco_weight
    return AggregateConstants(K1=float(np.sum(a)), K2=float(np.sum(a * (model.rho - 1.0))))


def aggregate_vector_field(state, constants: AggregateConstants) -> np.ndarray:
    """Derivative of ``[z, u]``; batched over leading axes."""
    state = np.asarray(state, dtype=float)
    z, u = state[..., 0], state[..., 1]
    ez = np.exp(z)
    return np.stack([1.0 - ez - u, constants.K1 * (ez - 1.0) - constants.K2], axis=-1)


def shifted_vector_field(state, constants: AggregateConstants) -> np.ndarray:
    """Derivative of ``[v, w]``; the origin is the fixed point."""
    state = np.asarray(state, dtype=float)
    k = constants.lyapunov_weight
    v, w = state[..., 0], state[..., 1]
    em1 = np.expm1(v)
    return np.stack([-constants.x0 * em1 - w, k * em1], axis=-1)


def lyapunov(v, w, constants: AggregateConstants):
    k = constants.lyapunov_weight
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    # expm1(v) - v keeps precision near the origin
    return np.expm1(v) - v + w**2 / (2.0 * k)


def lyapunov_rate(v, w, constants: AggregateConstants):
    """Closed-form ``dV/dt``; independent of ``w``."""
    constants.lyapunov_weight  # raises DegenerateSum
    v, w = np.broadcast_arrays(np.asarray(v, dtype=float), np.asarray(w, dtype=float))
    return -constants.x0 * np.expm1(v) ** 2


def to_aggregate(full_state) -> np.ndarray:
    """``[x, y...] -> [log x, sum y]``; requires ``x > 0``."""
    full_state = np.asarray(full_state, dtype=float)
    x = full_state[..., 0]
    if np.any(x <= 0):
        raise NumericalError("aggregate coordinates need x > 0 (resource level hit zero)")
    return np.stack([np.log(x), full_state[..., 1:].sum(axis=-1)], axis=-1)


def to_shifted(aggregate_state, constants: AggregateConstants) -> np.ndarray:
    a = np.asarray(aggregate_state, dtype=float)
    return a - np.array([constants.z0, constants.u0])


def individual_equilibrium(model: NondimModel, x0: float, u0: float) -> np.ndarray:
    """Steady-state efforts ``y*`` with ``sum(y*) = u0`` at resource level ``x0``.

    The per-agent balance ``(1-nu_i)(x0-rho_i) + nu_i sum_j w_ij (y_j - y_i) = 0``
    is singular along the all-ones direction; the sum constraint is appended
    and the stacked system solved by least squares, then checked.
    """
    w = model.weights.w
    nu = model.nu
    n = model.n
    L = nu[:, None] * (w - np.diag(w.sum(axis=1)))
    rhs = -(1.0 - nu) * (x0 - model.rho)
    sv = np.linalg.svd(L, compute_uv=False)
    rank = int(np.sum(sv > max(n * np.finfo(float).eps * sv[0], 1e-12)))
    if rank < n - 1:
        raise SingularBeyondKernel(
            f"balance matrix has rank {rank} < {n - 1}; weights are not strongly connected"
        )
    A = np.vstack([L, np.ones((1, n))])
    b = np.append(rhs, u0)
    y, *_ = np.linalg.lstsq(A, b, rcond=None)
    state = np.concatenate([[x0], y])
    res = np.max(np.abs(nondim_vector_field(state, model)[1:]))
    scale = max(1.0, float(np.max(np.abs(y))))
    if res > RESIDUAL_TOL * scale or abs(y.sum() - u0) > RESIDUAL_TOL * scale:
        raise IncompatibleEquilibrium(
            f"steady-state residual {res:.3e}; the network is probably not leaderless"
        )
    return y


@dataclass(frozen=True)
class EquilibriumReport:
    K1: float
    K2: float
    z0: float | None
    u0: float | None
    x0: float | None
    R0: float | None
    y_star: list[float] | None
    assumptions: AssumptionFlags
    assumptions_ok: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "assumptions_ok", self.assumptions.ok)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["assumptions"]["rho_violations"] = list(self.assumptions.rho_violations)
        return d


def equilibrium(model: NondimModel, tol: float = NEUTRAL_TOL) -> EquilibriumReport:
    """Aggregate equilibrium plus individual efforts.

    When an assumption fails the report keeps the aggregate quantities (if
    they exist) and leaves ``y_star`` empty. Raises :class:`DegenerateRatio`
    if ``K2/K1 + 1 <= 0``.
    """
    flags = check_assumptions(model, tol)
    c = aggregate_constants(model)
    z0 = c.z0
    x0, u0 = c.x0, c.u0
    Rmax = model.resource.Rmax if model.resource is not None else 1.0
    y_star = None
    if flags.ok:
        y_star = [float(v) for v in individual_equilibrium(model, x0, u0)]
    return EquilibriumReport(
        K1=c.K1, K2=c.K2, z0=z0, u0=u0, x0=x0, R0=x0 * Rmax, y_star=y_star, assumptions=flags
    )
