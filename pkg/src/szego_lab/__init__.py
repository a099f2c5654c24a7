"""Spectral Galerkin simulation and analyticity diagnostics for the cubic Szego equation

    i u_t = P(|u|^2 u)   on the Hardy space of the circle.
"""
from szego_lab.dynamics import (
    ConservationReport,
    SimConfig,
    Trajectory,
    hamiltonian,
    nonlinear_term,
    rhs,
    rk4_step,
    simulate,
)
from szego_lab.errors import (
    GevreyRangeError,
    IntegrationError,
    NumericalFailure,
    SzegoLabError,
    ValidationError,
)
from szego_lab.hankel import HankelReport, hankel_matrix, hankel_report, trace_norm
from szego_lab.hardy import (
    GevreyOrder,
    HardySeries,
    LaurentSlice,
    gevrey_wiener_norm,
    hs_norm,
    l2_norm,
    momentum,
    wiener_norm,
)
from szego_lab.kernels import BACKEND

__version__ = "0.1.0"
