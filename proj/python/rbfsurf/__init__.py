"""Meshfree RBF surface operators and reaction-diffusion experiments."""

from ._core import *  # noqa: F401,F403
from ._core import (
    BlowUp,
    Error,
    InvalidArgument,
    Kernel,
    NodeSet,
    SurfaceOperators,
    generate_nodes,
    laplacian_error,
    make_surface,
    run_convergence,
    run_spiral,
    run_turing,
    stability_scan,
)

__version__ = "0.1.0"
