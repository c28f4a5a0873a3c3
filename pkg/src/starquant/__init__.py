"""Phase-space quantization toolkit: star products, oscillator spectra, Weyl maps, grids and propagators."""

from .errors import (
    BasisMismatchError,
    BoundaryDecayError,
    ConvergenceError,
    ExponentOverflowError,
    ParseError,
    QuadratureOrderError,
    SingularExponentError,
    SingularityError,
    StarQuantError,
    UnsupportedOperationError,
)
from .gaussian import GaussianPoly, gaussian_star, gaussian_transition
from .grid import GridFunction, GridSpec, grid_star_poly, grid_star_series, integrate, marginal, moments, sample
from .kernel import GaussianKernel, compose, kernel_to_phase, mehler_kernel, slice_compose
from .oscillator import (
    StarExponential,
    fd_project,
    genvalue_residual,
    hamiltonian,
    projector,
    spectrum,
    star_exponential_closed,
    star_exponential_ode,
)
from .parser import format_poly, parse_expr
from .poly import CANONICAL, HOLOMORPHIC, HbarPoly, PhasePoly, PhysParams, poisson_bracket
from .star import MOYAL, NORMAL, STANDARD, TransitionOp, star_commutator, star_poly, transition_apply
from .weyl import FockMatrix, homomorphism_residual, theta_order, weyl_symbol

__version__ = "0.1.0"
