"""Social orientations that make a given network leaderless.

With row-stochastic weights the leaderless condition reads
``sum_j w_ji p_j = p_i`` for the social attributions ``p_i = beta_i nu_i``,
i.e. ``p`` spans the kernel of ``W = w.T - diag(rowsum(w))``. Since
``beta_i nu_i = s_i / r`` exactly, any positive kernel vector gives the
orientations directly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import KernelDimensionError, NonPositiveKernel
from .model import (
    AgentParams,
    DimensionalModel,
    ResourceParams,
    SocialWeights,
    validate_weights,
)

KERNEL_RTOL = 1e-10


def build_influence_matrix(weights: SocialWeights) -> np.ndarray:
    """Assemble ``W``: off-diagonal ``W[i, j] = w[j, i]``, diagonal ``-sum_{j != i} w[i, j]``.

    Every column of ``W`` sums to zero.
    """
    w = weights.w
    W = w.T.copy()
    off = w.sum(axis=1) - np.diag(w)
    np.fill_diagonal(W, -off)
    return W


def kernel_vector(W, rtol: float = KERNEL_RTOL) -> np.ndarray:
    """Strictly positive kernel direction of ``W``, scaled so its largest entry is 1.

    The kernel is read off the SVD: the last right singular vector, accepted
    when its singular value is at most ``rtol`` times the largest one. A
    second singular value under the same threshold means the kernel is
    multi-dimensional (the weight graph is not strongly connected).
    """
    W = np.asarray(W, dtype=float)
    _, sv, vt = np.linalg.svd(W)
    thresh = rtol * sv[0] if sv[0] > 0 else rtol
    small = int(np.sum(sv <= thresh))
    if small == 0:
        raise KernelDimensionError(0, f"no numerical kernel: smallest singular value {sv[-1]:.3e}")
    if small > 1:
        raise KernelDimensionError(small)
    p = vt[-1]
    p = p if p.sum() >= 0 else -p
    if not np.all(p > 0):
        raise NonPositiveKernel(f"kernel vector has non-positive entries (min {p.min():.3e})")
    p = p / p.max()
    res = np.max(np.abs(W @ p))
    if res > rtol:
        raise KernelDimensionError(1, f"kernel residual {res:.3e} exceeds {rtol:.1e}")
    return p


@dataclass(frozen=True, eq=False)
class SynthesisResult:
    products: np.ndarray
    orientations: np.ndarray
    residual: float
    model: DimensionalModel


def synthesize_orientations(
    weights,
    alpha: Sequence[float],
    R_threshold: Sequence[float],
    resource: ResourceParams = ResourceParams(),
    scale: float = 1.0,
) -> SynthesisResult:
    """Orientations ``s_i = r * scale * p_i`` rendering ``weights`` leaderless.

    ``products`` in the result is ``scale * p`` (the social attributions of
    the returned model); ``residual`` is ``max |W p|`` for the unit-max ``p``.
    """
    if not isinstance(weights, SocialWeights):
        weights = validate_weights(weights)
    if not scale > 0:
        raise ValueError(f"scale must be > 0, got {scale!r}")
    W = build_influence_matrix(weights)
    p = kernel_vector(W)
    residual = float(np.max(np.abs(W @ p)))
    s = resource.r * scale * p
    agents = tuple(AgentParams(float(a), float(si), float(R)) for a, si, R in zip(alpha, s, R_threshold))
    model = DimensionalModel(resource, agents, weights)
    return SynthesisResult(products=scale * p, orientations=s, residual=residual, model=model)
