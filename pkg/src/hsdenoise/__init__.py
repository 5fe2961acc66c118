"""Mixed-noise removal for hyperspectral image cubes.

The package solves a constrained convex recovery problem: a block
nuclear-norm regularizer on spatio-spectral difference tensors, subject
to l1 budgets on the sparse and stripe components, a flatness constraint
on the stripes, an l2 fidelity ball around the observation, and a box
on the image.  The solver is a preconditioned primal-dual splitting
iteration with closed-form resolvent steps.
"""

from .cube import Axis, HSCube, adjoint_diff, forward_diff, second_order_diff
from .degrade import NOISE_CASES, NoiseSpec, calibrate_radii, simulate
from .metrics import MetricReport, metric_report, mpsnr, mssim
from .prox import (
    NumericalFailure,
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
from .solver import (
    ConvergenceReport,
    DenoiseProblem,
    SolveResult,
    SolverState,
    StepsizeSet,
    StoppingRule,
    compute_stepsizes,
    ppds_step,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "Axis",
    "HSCube",
    "forward_diff",
    "adjoint_diff",
    "second_order_diff",
    "NumericalFailure",
    "project_box",
    "project_l1_ball",
    "project_l2_ball",
    "prox_l1",
    "prox_nuclear",
    "prox_conjugate",
    "BlockGeometry",
    "extract_blocks",
    "scatter_blocks_adjoint",
    "s3ttv_value",
    "sstv_value",
    "DenoiseProblem",
    "StepsizeSet",
    "SolverState",
    "StoppingRule",
    "ConvergenceReport",
    "SolveResult",
    "compute_stepsizes",
    "ppds_step",
    "solve",
    "NoiseSpec",
    "NOISE_CASES",
    "calibrate_radii",
    "simulate",
    "MetricReport",
    "metric_report",
    "mpsnr",
    "mssim",
    "__version__",
]
