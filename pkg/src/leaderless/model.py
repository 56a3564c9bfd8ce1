"""Model parameters, vector fields and the influence calculus.

Two frames are supported. The dimensional frame has resource ``R`` and
efforts ``e_i`` evolving in time ``tau``. The nondimensional frame has
``x = R/Rmax``, ``y_i = e_i/r`` and ``t = r*tau``, and it is the one that
gets integrated.

State vectors are flat arrays ``[x, y_1, ..., y_n]`` (or ``[R, e_1, ...]``).
All vector fields accept a leading batch axis, so ``state`` may have shape
``(n+1,)`` or ``(m, n+1)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    NegativeEntry,
    NonZeroDiagonal,
    RowSumNotOne,
    ValidationError,
    WeightsError,
)

ROW_SUM_TOL = 1e-12
NEUTRAL_TOL = 1e-9


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ResourceParams:
    r: float = 1.0
    Rmax: float = 1.0

    def __post_init__(self):
        problems = []
        if not (np.isfinite(self.r) and self.r > 0):
            problems.append(("resource.r", f"must be > 0, got {self.r!r}"))
        if not (np.isfinite(self.Rmax) and self.Rmax > 0):
            problems.append(("resource.Rmax", f"must be > 0, got {self.Rmax!r}"))
        if problems:
            raise ValidationError(problems)


@dataclass(frozen=True)
class AgentParams:
    """Ecological attribution ``alpha``, social-value orientation ``s`` and
    scarcity threshold ``R_threshold`` of one agent."""

    alpha: float
    s: float
    R_threshold: float

    def __post_init__(self):
        problems = []
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            problems.append(("alpha", f"must be > 0, got {self.alpha!r}"))
        if not (np.isfinite(self.s) and self.s > 0):
            problems.append(("s", f"must be > 0, got {self.s!r}"))
        if not np.isfinite(self.R_threshold):
            problems.append(("R_threshold", "must be finite"))
        if problems:
            raise ValidationError(problems)


@dataclass(frozen=True, eq=False)
class SocialWeights:
    """Validated row-stochastic tie strengths; ``w[i, j]`` is the tie from j to i.

    Build through :func:`validate_weights`.
    """

    w: np.ndarray

    @property
    def n(self) -> int:
        return self.w.shape[0]

    def __eq__(self, other):
        return isinstance(other, SocialWeights) and np.array_equal(self.w, other.w)

    __hash__ = None


def validate_weights(raw) -> SocialWeights:
    """Check a raw weight matrix and wrap it.

    Rows must sum to one within ``ROW_SUM_TOL``, the diagonal must be zero
    and no entry may be negative. Nothing is renormalized. The raised error
    is typed after the first violation found but lists all of them.
    """
    w = np.array(raw, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise WeightsError([("weights", f"must be a square matrix, got shape {w.shape}")])
    n = w.shape[0]
    if n < 2:
        raise WeightsError([("weights", "need at least 2 agents")])
    if not np.all(np.isfinite(w)):
        raise WeightsError([("weights", "entries must be finite")])
    found = []
    for i in np.flatnonzero(np.diag(w) != 0):
        found.append((NonZeroDiagonal, f"weights[{i}][{i}]", "diagonal must be 0"))
    for i, j in np.argwhere(w < 0):
        found.append((NegativeEntry, f"weights[{i}][{j}]", f"negative entry {w[i, j]!r}"))
    dev = w.sum(axis=1) - 1.0
    bad_rows = np.flatnonzero(np.abs(dev) > ROW_SUM_TOL)
    for i in bad_rows:
        found.append((RowSumNotOne, f"weights[{i}]", f"row sums to 1{dev[i]:+.3e}, expected 1"))
    if found:
        cls = found[0][0]
        problems = [(path, msg) for _, path, msg in found]
        if cls is RowSumNotOne:
            raise RowSumNotOne(int(bad_rows[0]), float(dev[bad_rows[0]]), problems)
        raise cls(problems)
    return SocialWeights(_frozen(w))


@dataclass(frozen=True, eq=False)
class DimensionalModel:
    resource: ResourceParams
    agents: tuple[AgentParams, ...]
    weights: SocialWeights

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        if len(self.agents) != self.weights.n:
            raise ValidationError(
                [("agents", f"{len(self.agents)} agents but weights are {self.weights.n}x{self.weights.n}")]
            )

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def alpha(self) -> np.ndarray:
        return np.array([a.alpha for a in self.agents])

    @property
    def s(self) -> np.ndarray:
        return np.array([a.s for a in self.agents])

    @property
    def R_threshold(self) -> np.ndarray:
        return np.array([a.R_threshold for a in self.agents])


@dataclass(frozen=True, eq=False)
class NondimModel:
    """Per-agent sensitivity ``beta``, socio-ecological relevance ``nu`` and
    environmentalism ``rho``.

    ``eco_weight`` is ``beta*(1-nu)``, the coefficient of ``x - rho`` in the
    effort equation. It equals ``alpha*Rmax/r**2`` and is what the aggregate
    constants are summed from. ``resource`` is kept when the model came from
    a dimensional one so that results can be mapped back.
    """

    beta: np.ndarray
    nu: np.ndarray
    rho: np.ndarray
    weights: SocialWeights
    eco_weight: np.ndarray = None
    resource: ResourceParams | None = None

    def __post_init__(self):
        beta, nu, rho = (_frozen(np.atleast_1d(v)) for v in (self.beta, self.nu, self.rho))
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "rho", rho)
        if self.eco_weight is None:
            object.__setattr__(self, "eco_weight", _frozen(beta * (1.0 - nu)))
        else:
            object.__setattr__(self, "eco_weight", _frozen(self.eco_weight))
        problems = []
        n = self.weights.n
        for name in ("beta", "nu", "rho", "eco_weight"):
            if getattr(self, name).shape != (n,):
                problems.append((name, f"expected {n} entries"))
        if problems:
            raise ValidationError(problems)
        if not np.all(beta > 0):
            problems.append(("beta", "must be > 0"))
        if not np.all((nu > 0) & (nu < 1)):
            problems.append(("nu", "must lie in (0, 1)"))
        if not np.all(self.eco_weight > 0):
            problems.append(("eco_weight", "must be > 0"))
        if not np.all(np.isfinite(rho)):
            problems.append(("rho", "must be finite"))
        if problems:
            raise ValidationError(problems)

    @property
    def n(self) -> int:
        return self.weights.n

    @property
    def products(self) -> np.ndarray:
        """Social attribution ``beta_i * nu_i`` of every agent."""
        return self.beta * self.nu


def nondimensionalize(model: DimensionalModel) -> NondimModel:
    r, Rmax = model.resource.r, model.resource.Rmax
    alpha, s = model.alpha, model.s
    eco = alpha * Rmax
    soc = r * s
    beta = (eco + soc) / r**2
    nu = soc / (eco + soc)
    return NondimModel(
        beta=beta,
        nu=nu,
        rho=model.R_threshold / Rmax,
        weights=model.weights,
        eco_weight=eco / r**2,
        resource=model.resource,
    )


def _social_term(y: np.ndarray, w: np.ndarray) -> np.ndarray:
    # sum_j w_ij (y_j - y_i), batched over leading axes
    return y @ w.T - y * w.sum(axis=1)


def dimensional_vector_field(state, model: DimensionalModel) -> np.ndarray:
    """Time derivative of ``[R, e_1, ..., e_n]`` with respect to ``tau``."""
    state = np.asarray(state, dtype=float)
    R = state[..., :1]
    e = state[..., 1:]
    r, Rmax = model.resource.r, model.resource.Rmax
    dR = r * R * (1.0 - R / Rmax) - R * e.sum(axis=-1, keepdims=True)
    de = model.alpha * (R - model.R_threshold) + model.s * _social_term(e, model.weights.w)
    return np.concatenate([dR, de], axis=-1)


def nondim_vector_field(state, model: NondimModel) -> np.ndarray:
    """Time derivative of ``[x, y_1, ..., y_n]`` with respect to ``t``."""
    state = np.asarray(state, dtype=float)
    x = state[..., :1]
    y = state[..., 1:]
    dx = (1.0 - x) * x - x * y.sum(axis=-1, keepdims=True)
    dy = model.beta * ((1.0 - model.nu) * (x - model.rho) + model.nu * _social_term(y, model.weights.w))
    return np.concatenate([dx, dy], axis=-1)


def nondim_field(model: NondimModel):
    """Return ``f(state)`` evaluating :func:`nondim_vector_field` with cached arrays.

    Same arithmetic in the same order, so results are bit-identical; used
    on the integration hot path.
    """
    beta, nu, rho = model.beta, model.nu, model.rho
    one_minus_nu = 1.0 - nu
    wT = np.ascontiguousarray(model.weights.w.T)
    rowsum = model.weights.w.sum(axis=1)

    def f(state):
        x = state[..., :1]
        y = state[..., 1:]
        out = np.empty_like(state)
        out[..., :1] = (1.0 - x) * x - x * y.sum(axis=-1, keepdims=True)
        out[..., 1:] = beta * (one_minus_nu * (x - rho) + nu * (y @ wT - y * rowsum))
        return out

    return f


def state_to_nondim(state, resource: ResourceParams) -> np.ndarray:
    """Map ``[R, e...]`` to ``[x, y...]``."""
    state = np.asarray(state, dtype=float)
    return np.concatenate([state[..., :1] / resource.Rmax, state[..., 1:] / resource.r], axis=-1)


def state_to_dimensional(state, resource: ResourceParams) -> np.ndarray:
    """Map ``[x, y...]`` to ``[R, e...]``."""
    state = np.asarray(state, dtype=float)
    return np.concatenate([state[..., :1] * resource.Rmax, state[..., 1:] * resource.r], axis=-1)


@dataclass(frozen=True, eq=False)
class InfluenceReport:
    in_influence: np.ndarray
    out_influence: np.ndarray
    net_influence: np.ndarray
    tol: float = NEUTRAL_TOL
    roles: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.roles:
            roles = tuple(
                "neutral" if abs(v) <= self.tol else ("leader" if v > 0 else "follower")
                for v in self.net_influence
            )
            object.__setattr__(self, "roles", roles)


def net_influence(products, w) -> np.ndarray:
    """Out-influence minus in-influence for social attributions ``products``."""
    p = np.asarray(products, dtype=float)
    w = np.asarray(w, dtype=float)
    return p @ w - p * w.sum(axis=1)


def influence(model: NondimModel, tol: float = NEUTRAL_TOL) -> InfluenceReport:
    p = model.products
    w = model.weights.w
    in_inf = p * w.sum(axis=1)
    out_inf = p @ w
    return InfluenceReport(in_inf, out_inf, out_inf - in_inf, tol=tol)


def leaderless_residual(model: NondimModel) -> float:
    return float(np.max(np.abs(net_influence(model.products, model.weights.w))))


def is_leaderless(model: NondimModel, tol: float = NEUTRAL_TOL) -> bool:
    return leaderless_residual(model) <= tol


def make_model(
    alpha: Sequence[float],
    s: Sequence[float],
    R_threshold: Sequence[float],
    weights,
    r: float = 1.0,
    Rmax: float = 1.0,
) -> DimensionalModel:
    """Convenience constructor from per-agent sequences and a raw weight matrix."""
    if not isinstance(weights, SocialWeights):
        weights = validate_weights(weights)
    if not len(alpha) == len(s) == len(R_threshold):
        raise ValidationError([("agents", "alpha, s and R_threshold differ in length")])
    agents = tuple(AgentParams(float(a), float(si), float(R)) for a, si, R in zip(alpha, s, R_threshold))
    return DimensionalModel(ResourceParams(float(r), float(Rmax)), agents, weights)
