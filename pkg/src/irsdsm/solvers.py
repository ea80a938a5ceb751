"""Phase-shift optimizers: DSM, gradient ascent and an exhaustive grid oracle."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .channel import ChannelSet
from .mimo import batch_sum_rate
from .spgm import (
    DEGENERATE_RTOL,
    TWO_PI,
    build_cache,
    wrap_phases,
)

__all__ = [
    "GRID_BUDGET",
    "DEFAULT_GA_STEPS",
    "GridBudgetError",
    "SolverOptions",
    "SolveOutcome",
    "dsm_solve",
    "ga_solve",
    "grid_search",
    "tune_ga_step",
    "tune_ga_step_pooled",
]

GRID_BUDGET = 10**8

DEFAULT_GA_STEPS = (1e-6, 3e-6, 1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1)

# GA stops as diverged once psi exceeds this multiple of its starting value
_BLOWUP = 1e12


class GridBudgetError(ValueError):
    """Raised when a grid search would need more than GRID_BUDGET evaluations."""


@dataclass(frozen=True)
class SolverOptions:
    """Termination and solver-specific settings.

    ``epsilon`` is an absolute tolerance on the change of the objective
    between consecutive iterations.
    """

    epsilon: float = 1e-3
    max_iters: int = 10_000
    ga_step: float = 1e-4
    grid_q: int = 16
    grid_objective: str = "sum_capacity"

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon!r}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError(f"max_iters must be a positive integer, got {self.max_iters!r}")
        if not self.ga_step > 0:
            raise ValueError(f"ga_step must be > 0, got {self.ga_step!r}")
        if int(self.grid_q) != self.grid_q or self.grid_q < 2:
            raise ValueError(f"grid_q must be an integer >= 2, got {self.grid_q!r}")
        if self.grid_objective not in ("sum_capacity", "spgm"):
            raise ValueError(
                f"grid_objective must be 'sum_capacity' or 'spgm', got {self.grid_objective!r}"
            )


@dataclass
class SolveOutcome:
    theta: np.ndarray
    psi_trace: np.ndarray
    iterations: int
    converged: bool
    wall_time: float
    psi_initial: float
    diverged: bool = False
    # psi after every single element update; only filled in tracking mode
    update_trace: np.ndarray | None = field(default=None, repr=False)

    @property
    def psi_final(self) -> float:
        if self.iterations == 0:
            return self.psi_initial
        return float(self.psi_trace[-1])


def _check_init(channels: ChannelSet, theta_init) -> np.ndarray:
    theta = np.atleast_1d(np.asarray(theta_init, dtype=float))
    if theta.shape != (channels.N,):
        raise ValueError(f"theta_init has shape {theta.shape}, expected ({channels.N},)")
    return wrap_phases(theta)


def dsm_solve(
    channels: ChannelSet,
    options: SolverOptions,
    theta_init,
    *,
    track_updates: bool = False,
) -> SolveOutcome:
    """Dimension-wise sinusoidal maximization of the sum path gain.

    Each iteration is one Gauss-Seidel sweep over the elements, setting
    every phase to its closed-form global maximizer given the others.  The
    loop stops once the objective changes by at most ``options.epsilon``
    between sweeps, or after ``options.max_iters`` sweeps.

    With ``track_updates`` the objective is recomputed from scratch after
    every single element update and kept in ``update_trace`` (starting with
    the initial value).  This costs O(N^2) per update and is meant for
    verification, not timing.
    """
    theta = _check_init(channels, theta_init)
    start = time.perf_counter()
    cache = build_cache(channels)
    tol = DEGENERATE_RTOL * cache.scale
    iterations, converged, status, psi_initial, trace, updates = _kernels.dsm_run(
        cache.f_diag, cache.coupling, cache.direct_power, theta,
        float(options.epsilon), int(options.max_iters), tol, bool(track_updates),
    )
    wall = time.perf_counter() - start
    if status == _kernels.NONFINITE:
        raise FloatingPointError("objective became non-finite during DSM; check the channels")
    update_trace = updates.copy() if track_updates else None
    return SolveOutcome(
        theta=wrap_phases(theta),
        psi_trace=trace.copy(),
        iterations=int(iterations),
        converged=bool(converged),
        wall_time=wall,
        psi_initial=float(psi_initial),
        update_trace=update_trace,
    )


def ga_solve(channels: ChannelSet, options: SolverOptions, theta_init) -> SolveOutcome:
    """Fixed-step gradient ascent ``theta += ga_step * grad psi``.

    Uses the same termination rule as :func:`dsm_solve`.  A run whose
    objective turns non-finite, blows up, or drops below its starting value
    is stopped early with ``diverged=True``; a correctly sized ascent step
    never decreases the objective below where it started.
    """
    theta = _check_init(channels, theta_init)
    start = time.perf_counter()
    cache = build_cache(channels)
    iterations, converged, status, psi_initial, trace = _kernels.ga_run(
        cache.f_diag, cache.coupling, cache.direct_power, theta,
        float(options.ga_step), float(options.epsilon), int(options.max_iters), _BLOWUP,
    )
    wall = time.perf_counter() - start
    return SolveOutcome(
        theta=wrap_phases(theta),
        psi_trace=trace.copy(),
        iterations=int(iterations),
        converged=bool(converged),
        wall_time=wall,
        psi_initial=float(psi_initial),
        diverged=status != _kernels.OK,
    )


def _grid_chunk_values(channels, cache, phases, objective, snr):
    if objective == "spgm":
        quad = np.einsum("bn,nm,bm->b", phases.conj(), cache.coupling, phases).real
        cross = 2.0 * np.real(phases @ cache.f_diag.conj())
        return cache.direct_power + cross + quad
    h_batch = channels.F + np.einsum("ln,bn,nk->blk", channels.G, phases, channels.H, optimize=True)
    return batch_sum_rate(h_batch, snr)


def grid_search(
    channels: ChannelSet,
    options: SolverOptions,
    snr: float | None = None,
    *,
    chunk_size: int = 1 << 18,
) -> tuple[np.ndarray, float]:
    """Exhaustive search over phases quantized to multiples of 2*pi/Q.

    Maximizes the water-filled sum rate (``grid_objective='sum_capacity'``,
    needs ``snr``) or the sum path gain (``'spgm'``).  Ties go to the
    lexicographically smallest index vector.

    Raises
    ------
    GridBudgetError
        If ``Q**N`` exceeds :data:`GRID_BUDGET`.
    """
    Q, N = int(options.grid_q), channels.N
    total = Q**N
    if total > GRID_BUDGET:
        raise GridBudgetError(
            f"grid search needs Q**N = {Q}**{N} evaluations, over the budget of {GRID_BUDGET:.0e}"
        )
    objective = options.grid_objective
    if objective == "sum_capacity" and (snr is None or not snr > 0):
        raise ValueError("sum-capacity grid search needs a positive snr")
    cache = build_cache(channels)
    levels = np.exp(1j * TWO_PI * np.arange(Q) / Q)
    shape = (Q,) * N
    best_value, best_index = -np.inf, 0
    for lo in range(0, total, chunk_size):
        flat = np.arange(lo, min(lo + chunk_size, total))
        # C-order unravel: the first element is the most significant digit
        digits = np.stack(np.unravel_index(flat, shape), axis=-1)
        values = _grid_chunk_values(channels, cache, levels[digits], objective, snr)
        j = int(np.argmax(values))
        if values[j] > best_value:
            best_value, best_index = float(values[j]), int(flat[j])
    digits = np.array(np.unravel_index(best_index, shape))
    return TWO_PI * digits / Q, best_value


def tune_ga_step(
    channels: ChannelSet,
    options: SolverOptions,
    candidate_steps: Sequence[float],
    theta_init,
) -> float:
    """Step with the fewest GA iterations among converged runs.

    Falls back to the smallest candidate when no run converges.
    """
    return tune_ga_step_pooled([(channels, theta_init)], options, candidate_steps)


def tune_ga_step_pooled(
    instances: Sequence[tuple[ChannelSet, np.ndarray]],
    options: SolverOptions,
    candidate_steps: Sequence[float],
) -> float:
    """Pick one GA step for a set of (channels, theta_init) instances.

    Candidates are ranked by mean iteration count, charging ``max_iters``
    for every run that does not converge.  Only candidates that converge on
    at least one instance are eligible; if none do, the smallest candidate
    is returned.
    """
    steps = [float(s) for s in candidate_steps]
    if not steps:
        raise ValueError("candidate_steps must not be empty")
    if len(steps) == 1:
        return steps[0]
    best_step, best_cost = None, np.inf
    for step in steps:
        opts = SolverOptions(
            epsilon=options.epsilon, max_iters=options.max_iters, ga_step=step,
            grid_q=options.grid_q, grid_objective=options.grid_objective,
        )
        costs, any_converged = [], False
        for channels, theta_init in instances:
            out = ga_solve(channels, opts, theta_init)
            any_converged |= out.converged
            costs.append(out.iterations if out.converged else options.max_iters)
        cost = float(np.mean(costs))
        if any_converged and cost < best_cost:
            best_step, best_cost = step, cost
    if best_step is None:
        return min(steps)
    return best_step
