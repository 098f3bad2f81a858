"""Two-block and three-block Gibbs kernels plus the chain driver.

Both kernel families share the same latent-scale update, which uses the
incoming coefficients and residual variance. They differ only in how the
residual variance is drawn afterwards:

* two-block: residual variance from its conditional given the scales alone
  (marginal over the coefficients), then the coefficients;
* three-block: residual variance from its conditional given the incoming
  coefficients and the fresh scales, then the coefficients.

Either way a step performs exactly one Cholesky factorization of the
posterior precision, reused for the variance draw (two-block) and for the
coefficient mean and noise solves.

Draw-order contract per step (fixed for reproducibility): group scales
first, then per-coefficient / per-difference scales, then the residual
variance, then the coefficient noise vector.
"""
from __future__ import annotations

import enum
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._linalg import cholesky_spd, solve_lower, solve_lower_t
from .errors import FactorizationError, SamplerError
from .model_core import (
    ChainState,
    Dataset,
    LatentScales,
    ModelKind,
    ModelSpec,
    add_prior_precision,
    SymmetricTridiagonal,
)
from .rng_dist import RngStream

__all__ = [
    "KernelKind",
    "RunConfig",
    "ChainOutput",
    "run_chain",
    "initial_chain_state",
    "map_jobs",
    "step_2bg_group",
    "step_3bg_group",
    "step_2bg_sparse_group",
    "step_3bg_sparse_group",
    "step_2bg_fused",
    "step_3bg_fused",
]


class KernelKind(str, enum.Enum):
    TWO_BLOCK = "2bg"
    THREE_BLOCK = "3bg"


@dataclass(frozen=True)
class RunConfig:
    """Chain length, burn-in, seed, and storage options."""

    n_iter: int = 10_000
    burn_in: int = 1_000
    seed: int = 0
    store_beta: bool = False
    thin: int = 1

    def __post_init__(self):
        if self.n_iter < 1:
            raise ValueError("n_iter must be >= 1")
        if not 0 <= self.burn_in < self.n_iter:
            raise ValueError(
                f"burn_in must satisfy 0 <= burn_in < n_iter, got "
                f"burn_in={self.burn_in}, n_iter={self.n_iter}")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")


@dataclass(frozen=True)
class ChainOutput:
    """Stored draws and run metadata for one chain.

    `wall_time_seconds` covers the iteration loop only (burn-in included),
    measured on a monotonic clock; dataset generation and I/O are excluded.
    """

    sigma2_draws: np.ndarray
    beta_draws: np.ndarray | None
    wall_time_seconds: float
    kernel: KernelKind
    model: ModelSpec
    seed: int
    n: int
    p: int
    config: RunConfig


@dataclass(frozen=True)
class _Workspace:
    """Per-dataset precomputations shared by every iteration."""

    x: np.ndarray
    y: np.ndarray
    gram: np.ndarray
    xty: np.ndarray
    yty: float
    n: int
    p: int

    @classmethod
    def build(cls, dataset: Dataset) -> "_Workspace":
        gram = dataset.x.T @ dataset.x
        return cls(x=dataset.x, y=dataset.y, gram=gram,
                   xty=dataset.x.T @ dataset.y,
                   yty=float(dataset.y @ dataset.y),
                   n=dataset.n, p=dataset.p)


def _ig_draws(lam_sq: float, sigma2: float, sq: np.ndarray,
              rng: RngStream) -> np.ndarray:
    """Reciprocal-scale draws: IG(sqrt(lam^2 sigma2 / sq), lam^2) per entry.

    Entries with sq == 0 get an infinite mean parameter and take the exact
    large-mean limit inside the transform (the zero-coefficient branch).
    """
    mu = np.sqrt(np.divide(lam_sq * sigma2, sq,
                           out=np.full_like(sq, np.inf), where=sq > 0.0))
    gen = rng.generator
    return _kernels.ig_transform(mu, lam_sq, gen.standard_normal(mu.shape[0]),
                                 gen.random(mu.shape[0]))


def _latent_update(spec: ModelSpec, ws: _Workspace, beta: np.ndarray,
                   sigma2: float, rng: RngStream) -> tuple[np.ndarray, ...]:
    """Draw the reciprocal latent scales given the incoming (beta, sigma2)."""
    kind = spec.kind
    if kind is ModelKind.GROUP_LASSO:
        g = spec.groups
        sq = _kernels.group_sqnorms(beta, g.offsets, g.group_sizes)
        return (_ig_draws(spec.lam * spec.lam, sigma2, sq, rng),)
    if kind is ModelKind.SPARSE_GROUP_LASSO:
        g = spec.groups
        sq = _kernels.group_sqnorms(beta, g.offsets, g.group_sizes)
        inv_tau2 = _ig_draws(spec.lam1 * spec.lam1, sigma2, sq, rng)
        inv_gamma2 = _ig_draws(spec.lam2 * spec.lam2, sigma2, beta * beta, rng)
        return (inv_tau2, inv_gamma2)
    inv_tau2 = _ig_draws(spec.lam1 * spec.lam1, sigma2, beta * beta, rng)
    diffs = beta[1:] - beta[:-1]
    inv_omega2 = _ig_draws(spec.lam2 * spec.lam2, sigma2, diffs * diffs, rng)
    return (inv_tau2, inv_omega2)


def _prior_precision(spec: ModelSpec, inv_scales: tuple[np.ndarray, ...]):
    """Prior precision (diagonal vector or tridiagonal bands) from reciprocals."""
    kind = spec.kind
    if kind is ModelKind.GROUP_LASSO:
        return _kernels.expand_by_group(inv_scales[0], spec.groups.group_sizes)
    if kind is ModelKind.SPARSE_GROUP_LASSO:
        rep = _kernels.expand_by_group(inv_scales[0], spec.groups.group_sizes)
        return rep + inv_scales[1]
    diag, off = _kernels.fused_bands(inv_scales[0], inv_scales[1])
    return SymmetricTridiagonal(diag, off)


def _prior_quad(prior_inv, beta: np.ndarray) -> float:
    if isinstance(prior_inv, SymmetricTridiagonal):
        return _kernels.tridiag_quad_form(prior_inv.diag, prior_inv.off, beta)
    return float(prior_inv @ (beta * beta))


def _block_update(spec: ModelSpec, ws: _Workspace, kernel: KernelKind,
                  beta: np.ndarray, prior_inv,
                  rng: RngStream) -> tuple[np.ndarray, float]:
    """Draw (sigma2, beta) given the fresh scales; one factorization total."""
    a = add_prior_precision(ws.gram, prior_inv)
    chol = cholesky_spd(a, "posterior precision")
    u = solve_lower(chol, ws.xty)
    if kernel is KernelKind.TWO_BLOCK:
        shape = 0.5 * ws.n + spec.alpha
        scale = 0.5 * (ws.yty - float(u @ u)) + spec.xi
    else:
        resid = ws.y - ws.x @ beta
        shape = 0.5 * (ws.n + ws.p + 2.0 * spec.alpha)
        scale = 0.5 * (float(resid @ resid) + _prior_quad(prior_inv, beta)
                       + 2.0 * spec.xi)
    if scale <= 0.0:
        raise ValueError(f"non-positive residual-variance scale {scale}")
    sigma2 = scale / rng.generator.gamma(shape)
    mean = solve_lower_t(chol, u)
    z = rng.generator.standard_normal(ws.p)
    new_beta = mean + math.sqrt(sigma2) * solve_lower_t(chol, z)
    return new_beta, float(sigma2)


def _inv_scales_of(spec: ModelSpec, scales: LatentScales) -> tuple[np.ndarray, ...]:
    if spec.kind is ModelKind.GROUP_LASSO:
        return (1.0 / scales.tau2,)
    if spec.kind is ModelKind.SPARSE_GROUP_LASSO:
        return (1.0 / scales.tau2, 1.0 / scales.gamma2)
    return (1.0 / scales.tau2, 1.0 / scales.omega2)


def _scales_of(spec: ModelSpec, inv_scales: tuple[np.ndarray, ...]) -> LatentScales:
    if spec.kind is ModelKind.GROUP_LASSO:
        return LatentScales(tau2=1.0 / inv_scales[0])
    if spec.kind is ModelKind.SPARSE_GROUP_LASSO:
        return LatentScales(tau2=1.0 / inv_scales[0], gamma2=1.0 / inv_scales[1])
    return LatentScales(tau2=1.0 / inv_scales[0], omega2=1.0 / inv_scales[1])


def _step(kernel: KernelKind, state: ChainState, dataset: Dataset,
          spec: ModelSpec, rng: RngStream) -> ChainState:
    spec.validate_for(dataset)
    ws = _Workspace.build(dataset)
    inv_scales = _latent_update(spec, ws, state.beta, state.sigma2, rng)
    prior_inv = _prior_precision(spec, inv_scales)
    beta, sigma2 = _block_update(spec, ws, kernel, state.beta, prior_inv, rng)
    return ChainState(beta=beta, sigma2=sigma2, scales=_scales_of(spec, inv_scales))


def _checked_kind(spec: ModelSpec, kind: ModelKind) -> None:
    if spec.kind is not kind:
        raise ValueError(f"expected a {kind.value} ModelSpec, got {spec.kind.value}")


def step_2bg_group(state: ChainState, dataset: Dataset, spec: ModelSpec,
                   rng: RngStream) -> ChainState:
    """One two-block step for the group lasso model."""
    _checked_kind(spec, ModelKind.GROUP_LASSO)
    return _step(KernelKind.TWO_BLOCK, state, dataset, spec, rng)


def step_3bg_group(state: ChainState, dataset: Dataset, spec: ModelSpec,
                   rng: RngStream) -> ChainState:
    """One three-block step for the group lasso model."""
    _checked_kind(spec, ModelKind.GROUP_LASSO)
    return _step(KernelKind.THREE_BLOCK, state, dataset, spec, rng)


def step_2bg_sparse_group(state: ChainState, dataset: Dataset, spec: ModelSpec,
                          rng: RngStream) -> ChainState:
    """One two-block step for the sparse group lasso model."""
    _checked_kind(spec, ModelKind.SPARSE_GROUP_LASSO)
    return _step(KernelKind.TWO_BLOCK, state, dataset, spec, rng)


def step_3bg_sparse_group(state: ChainState, dataset: Dataset, spec: ModelSpec,
                          rng: RngStream) -> ChainState:
    """One three-block step for the sparse group lasso model."""
    _checked_kind(spec, ModelKind.SPARSE_GROUP_LASSO)
    return _step(KernelKind.THREE_BLOCK, state, dataset, spec, rng)


def step_2bg_fused(state: ChainState, dataset: Dataset, spec: ModelSpec,
                   rng: RngStream) -> ChainState:
    """One two-block step for the fused lasso model."""
    _checked_kind(spec, ModelKind.FUSED_LASSO)
    return _step(KernelKind.TWO_BLOCK, state, dataset, spec, rng)


def step_3bg_fused(state: ChainState, dataset: Dataset, spec: ModelSpec,
                   rng: RngStream) -> ChainState:
    """One three-block step for the fused lasso model."""
    _checked_kind(spec, ModelKind.FUSED_LASSO)
    return _step(KernelKind.THREE_BLOCK, state, dataset, spec, rng)


def initial_chain_state(spec: ModelSpec, dataset: Dataset) -> ChainState:
    """Deterministic start: zero coefficients, response variance, unit scales."""
    p = dataset.p
    sigma2 = float(np.var(dataset.y, ddof=1)) if dataset.n > 1 else 1.0
    if not (math.isfinite(sigma2) and sigma2 > 0.0):
        sigma2 = 1.0
    if spec.kind is ModelKind.GROUP_LASSO:
        scales = LatentScales(tau2=np.ones(spec.groups.n_groups))
    elif spec.kind is ModelKind.SPARSE_GROUP_LASSO:
        scales = LatentScales(tau2=np.ones(spec.groups.n_groups),
                              gamma2=np.ones(p))
    else:
        scales = LatentScales(tau2=np.ones(p), omega2=np.ones(p - 1))
    return ChainState(beta=np.zeros(p), sigma2=sigma2, scales=scales)


def run_chain(kernel: KernelKind, spec: ModelSpec, dataset: Dataset,
              config: RunConfig, *, rng: RngStream | None = None,
              initial_state: ChainState | None = None,
              freeze_scales: bool = False) -> ChainOutput:
    """Run one Gibbs chain and store post-burn-in, thinned draws.

    `freeze_scales` is a test hook: it skips the latent-scale update so the
    (sigma2, beta) block is drawn with the scales pinned at their values in
    `initial_state` (under the two-block kernel this makes the stored draws
    i.i.d. from the exact conditional posterior).
    """
    kernel = KernelKind(kernel)
    spec.validate_for(dataset)
    ws = _Workspace.build(dataset)
    state = initial_chain_state(spec, dataset) if initial_state is None else initial_state
    rng = RngStream(config.seed) if rng is None else rng

    beta = state.beta
    sigma2 = state.sigma2
    inv_scales = _inv_scales_of(spec, state.scales)
    frozen_prior = _prior_precision(spec, inv_scales) if freeze_scales else None

    n_keep = (config.n_iter - config.burn_in) // config.thin
    sigma2_draws = np.empty(n_keep)
    beta_draws = np.empty((n_keep, ws.p)) if config.store_beta else None

    _kernels.warm_up()  # keep JIT compilation out of the timed loop
    t0 = time.perf_counter()
    for it in range(config.n_iter):
        try:
            if freeze_scales:
                prior_inv = frozen_prior
            else:
                inv_scales = _latent_update(spec, ws, beta, sigma2, rng)
                prior_inv = _prior_precision(spec, inv_scales)
            beta, sigma2 = _block_update(spec, ws, kernel, beta, prior_inv, rng)
        except (ValueError, FactorizationError) as exc:
            raise SamplerError(it, str(exc)) from exc
        if not (math.isfinite(sigma2) and np.all(np.isfinite(beta))):
            raise SamplerError(it, "non-finite draw")
        k = it - config.burn_in
        if k >= 0 and k % config.thin == config.thin - 1:
            sigma2_draws[k // config.thin] = sigma2
            if beta_draws is not None:
                beta_draws[k // config.thin] = beta
    wall = time.perf_counter() - t0

    return ChainOutput(sigma2_draws=sigma2_draws, beta_draws=beta_draws,
                       wall_time_seconds=wall, kernel=kernel, model=spec,
                       seed=rng.seed, n=ws.n, p=ws.p, config=config)


def map_jobs(worker, items, jobs: int = 1) -> list:
    """Run `worker` over `items`, optionally across processes.

    Results come back in the order of `items` regardless of completion
    order, so parallel benchmark output stays deterministic.
    """
    if jobs <= 1:
        return [worker(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, items))
