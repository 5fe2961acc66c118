"""Preconditioned primal-dual splitting solver for the recovery problem.

The problem: minimize the chosen regularizer of u subject to an l1
budget on the sparse component s, an l1 budget plus vertical flatness on
the stripe component t, an l2 fidelity ball tying u + s + t to the
observation, and a box on u.

Each iteration takes resolvent steps on the primal variables, forms the
extrapolated points 2*new - old, and updates the dual variables through
the conjugate proxes.  Stepsizes are diagonal constants chosen so the
preconditioned operator stays firmly nonexpansive.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from . import _kernels
from .cube import Axis, HSCube
from .prox import (
    project_box,
    project_l1_ball,
    project_l2_ball,
    prox_conjugate,
    prox_l1,
    prox_nuclear,
)
from .regularizer import (
    BlockGeometry,
    extract_blocks,
    s3ttv_value,
    scatter_blocks_adjoint,
    sstv_value,
)

REGULARIZERS = ("s3ttv", "sstv")


@dataclass(frozen=True)
class StepsizeSet:
    """Diagonal stepsizes: one per primal variable, one per dual row."""

    tau_u: float
    tau_s: float
    tau_t: float
    sigma_blocks: float
    sigma_stripe: float
    sigma_fidelity: float

    def as_dict(self) -> dict:
        return {
            "tau_u": self.tau_u,
            "tau_s": self.tau_s,
            "tau_t": self.tau_t,
            "sigma_blocks": self.sigma_blocks,
            "sigma_stripe": self.sigma_stripe,
            "sigma_fidelity": self.sigma_fidelity,
        }


def compute_stepsizes(geometry: BlockGeometry, regularizer: str = "s3ttv") -> StepsizeSet:
    """Default stepsizes.

    For the block regularizer tau_u = 1/(8B + 1) with B the number of
    blocks; every pixel of u meets each block row through eight stencil
    entries plus the identity of the fidelity row.  For the l1 variant
    the eight entries of the two difference stencils give 1/9.  The dual
    stepsizes are the reciprocals of the row sums: 4 for the difference
    stencils, 2 for the stripe-flatness row, 3 for the fidelity row.
    """
    if regularizer not in REGULARIZERS:
        raise ValueError(f"unknown regularizer: {regularizer!r}")
    if regularizer == "s3ttv":
        tau_u = 1.0 / (8.0 * geometry.n_blocks + 1.0)
    else:
        tau_u = 1.0 / 9.0
    return StepsizeSet(
        tau_u=tau_u,
        tau_s=1.0,
        tau_t=1.0 / 3.0,
        sigma_blocks=1.0 / 4.0,
        sigma_stripe=1.0 / 2.0,
        sigma_fidelity=1.0 / 3.0,
    )


def rowsum_stepsizes(geometry: BlockGeometry, regularizer: str = "s3ttv") -> StepsizeSet:
    """Stepsizes from the exact per-variable absolute column/row sums.

    Unlike compute_stepsizes this accounts for how often each pixel is
    actually covered by blocks, so for a non-overlapping tiling tau_u is
    1/9 rather than 1/(8B + 1).  Reported as a diagnostic next to the
    defaults; assumes every cube dimension is at least 2.
    """
    if regularizer not in REGULARIZERS:
        raise ValueError(f"unknown regularizer: {regularizer!r}")
    if regularizer == "s3ttv":
        cov = geometry.coverage().astype(np.float64)
        colsum = (
            4.0 * cov
            + 2.0 * np.roll(cov, 1, axis=0)
            + 2.0 * np.roll(cov, 1, axis=1)
            + 1.0
        )
        tau_u = 1.0 / float(colsum.max())
    else:
        tau_u = 1.0 / 9.0
    return StepsizeSet(
        tau_u=tau_u,
        tau_s=1.0,
        tau_t=1.0 / 3.0,
        sigma_blocks=1.0 / 4.0,
        sigma_stripe=1.0 / 2.0,
        sigma_fidelity=1.0 / 3.0,
    )


@dataclass(frozen=True)
class StoppingRule:
    """Stop when the relative change of u drops below the threshold."""

    relative_change: float = 1e-5
    max_iterations: int = 20000

    def __post_init__(self):
        if self.relative_change <= 0:
            raise ValueError("relative_change must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class DenoiseProblem:
    """One denoising instance: observation, radii, box and geometry."""

    observed: HSCube
    alpha: float
    beta: float
    epsilon: float
    geometry: BlockGeometry
    mu_lower: float = 0.0
    mu_upper: float = 1.0
    regularizer: str = "s3ttv"

    def __post_init__(self):
        if min(self.alpha, self.beta, self.epsilon) < 0:
            raise ValueError("radii must be nonnegative")
        if self.mu_lower > self.mu_upper:
            raise ValueError("empty box")
        if self.regularizer not in REGULARIZERS:
            raise ValueError(f"unknown regularizer: {self.regularizer!r}")
        if (self.geometry.n1, self.geometry.n2) != self.observed.shape[:2]:
            raise ValueError("geometry is bound to a different spatial grid")


@dataclass(frozen=True, eq=False)
class SolverState:
    """All primal and dual iterates plus loop bookkeeping.

    y_blocks holds the regularizer dual: a stack of block matrices for
    s3ttv, a (2, n1, n2, n3) array of difference cubes for sstv.
    """

    u: np.ndarray
    s: np.ndarray
    t: np.ndarray
    y_blocks: np.ndarray
    y_stripe: np.ndarray
    y_fidelity: np.ndarray
    iteration: int = 0
    relative_change: float = math.inf


def initial_state(problem: DenoiseProblem) -> SolverState:
    v = problem.observed.data
    u0 = np.clip(v, problem.mu_lower, problem.mu_upper)
    geom = problem.geometry
    n3 = problem.observed.n3
    if problem.regularizer == "s3ttv":
        y_blocks = np.zeros((geom.n_blocks, geom.block_pixels, 2 * n3))
    else:
        y_blocks = np.zeros((2,) + v.shape)
    return SolverState(
        u=u0,
        s=np.zeros_like(v),
        t=np.zeros_like(v),
        y_blocks=y_blocks,
        y_stripe=np.zeros_like(v),
        y_fidelity=np.zeros_like(v),
    )


_V, _H, _S = int(Axis.VERTICAL), int(Axis.HORIZONTAL), int(Axis.SPECTRAL)


def ppds_step(state: SolverState, problem: DenoiseProblem, steps: StepsizeSet) -> SolverState:
    """One full primal-dual iteration; returns the next state."""
    v = problem.observed.data
    geom = problem.geometry
    block_mode = problem.regularizer == "s3ttv"

    # primal: gradient-like steps through the transposed operators,
    # then the resolvents (box clamp and the two l1-ball projections)
    if block_mode:
        gv, gh = scatter_blocks_adjoint(state.y_blocks, geom)
    else:
        gv, gh = state.y_blocks[0], state.y_blocks[1]
    grad_u = _kernels.adjoint_diff(
        _kernels.adjoint_diff(gv, _V) + _kernels.adjoint_diff(gh, _H), _S
    )
    grad_u += state.y_fidelity
    u = project_box(state.u - steps.tau_u * grad_u, problem.mu_lower, problem.mu_upper)
    s = project_l1_ball(state.s - steps.tau_s * state.y_fidelity, problem.alpha)
    grad_t = _kernels.adjoint_diff(state.y_stripe, _V) + state.y_fidelity
    t = project_l1_ball(state.t - steps.tau_t * grad_t, problem.beta)

    ue = 2.0 * u - state.u
    se = 2.0 * s - state.s
    te = 2.0 * t - state.t

    # dual: conjugate proxes at the extrapolated points
    ds = _kernels.forward_diff(ue, _S)
    dv = _kernels.forward_diff(ds, _V)
    dh = _kernels.forward_diff(ds, _H)
    if block_mode:
        z = state.y_blocks + steps.sigma_blocks * extract_blocks(dv, dh, geom)
        y_blocks = prox_conjugate(z, steps.sigma_blocks, prox_nuclear)
    else:
        z = state.y_blocks + steps.sigma_blocks * np.stack((dv, dh))
        y_blocks = prox_conjugate(z, steps.sigma_blocks, prox_l1)
    # the conjugate prox of the zero-set indicator is the identity
    y_stripe = state.y_stripe + steps.sigma_stripe * _kernels.forward_diff(te, _V)
    z3 = state.y_fidelity + steps.sigma_fidelity * (ue + se + te)
    y_fidelity = prox_conjugate(
        z3,
        steps.sigma_fidelity,
        lambda w, _scale: project_l2_ball(w, v, problem.epsilon),
    )

    denom = float(np.linalg.norm(state.u.ravel()))
    diff = float(np.linalg.norm((u - state.u).ravel()))
    if denom > 0.0:
        rel = diff / denom
    else:
        rel = 0.0 if diff == 0.0 else math.inf

    return SolverState(
        u=u,
        s=s,
        t=t,
        y_blocks=y_blocks,
        y_stripe=y_stripe,
        y_fidelity=y_fidelity,
        iteration=state.iteration + 1,
        relative_change=rel,
    )


def _residuals(problem: DenoiseProblem, u, s, t) -> dict:
    v = problem.observed.data
    flat = _kernels.forward_diff(t, _V)
    box_low = float(np.max(problem.mu_lower - u, initial=0.0))
    box_high = float(np.max(u - problem.mu_upper, initial=0.0))
    return {
        "l1_s": float(np.abs(s).sum() - problem.alpha),
        "l1_t": float(np.abs(t).sum() - problem.beta),
        "flatness": float(np.linalg.norm(flat.ravel())),
        "fidelity": float(np.linalg.norm((u + s + t - v).ravel()) - problem.epsilon),
        "box": max(box_low, box_high),
    }


@dataclass(frozen=True)
class ConvergenceReport:
    """Run summary: counts, residuals and the per-iteration objective.

    Residual signs follow slack convention: l1 and fidelity entries are
    (attained - budget), so feasible means <= 0; flatness and box are
    plain magnitudes, feasible means ~ 0.
    """

    iterations: int
    relative_change: float
    converged: bool
    objective_trace: tuple[float, ...]
    residuals: dict
    stepsizes: StepsizeSet
    rowsum_stepsizes: StepsizeSet

    def as_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "relative_change": self.relative_change,
            "converged": self.converged,
            "objective_trace": list(self.objective_trace),
            "residuals": dict(self.residuals),
            "stepsizes": self.stepsizes.as_dict(),
            "rowsum_stepsizes": self.rowsum_stepsizes.as_dict(),
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.as_dict(), indent=indent, sort_keys=True)


class SolveResult(NamedTuple):
    u: HSCube
    s: HSCube
    t: HSCube
    report: ConvergenceReport


def solve(
    problem: DenoiseProblem,
    stopping: StoppingRule | None = None,
    callback: Callable[[SolverState], None] | None = None,
) -> SolveResult:
    """Iterate ppds_step from the standard initial point until the
    relative change of u falls below the stopping threshold.

    The first iteration from all-zero duals cannot move the primals, so
    the stopping test is only applied from the second iteration on.  If
    max_iterations is hit first the last state is returned with the
    report flagged as not converged.
    """
    stopping = StoppingRule() if stopping is None else stopping
    steps = compute_stepsizes(problem.geometry, problem.regularizer)
    if problem.regularizer == "s3ttv":
        objective = lambda u: s3ttv_value(u, problem.geometry)
    else:
        objective = sstv_value

    state = initial_state(problem)
    trace = []
    converged = False
    while state.iteration < stopping.max_iterations:
        state = ppds_step(state, problem, steps)
        trace.append(objective(state.u))
        if callback is not None:
            callback(state)
        if state.iteration >= 2 and state.relative_change < stopping.relative_change:
            converged = True
            break

    report = ConvergenceReport(
        iterations=state.iteration,
        relative_change=state.relative_change,
        converged=converged,
        objective_trace=tuple(trace),
        residuals=_residuals(problem, state.u, state.s, state.t),
        stepsizes=steps,
        rowsum_stepsizes=rowsum_stepsizes(problem.geometry, problem.regularizer),
    )
    return SolveResult(HSCube(state.u), HSCube(state.s), HSCube(state.t), report)
