"""Isochronous oscillator with position-dependent mass m(x) = a/x.

Classical trajectories, the closed-form orbit and its linearization, the exact
quantum spectrum for any von Roos ordering, and two independent finite-difference
eigensolvers to check it against.
"""
from .classical import (
    OrbitSolution,
    Trajectory,
    analytic_orbit,
    integrate,
    linearization_witness,
    measure_period,
    rhs,
)
from .eigensolve import EigenGrid, EigenResult, refine, solve_x_space, solve_xi_space
from .errors import (
    AdmissibilityError,
    AmplitudeDomainError,
    DomainError,
    GridTooCoarse,
    IntegrationError,
    SingularEndpointWarning,
)
from .model import ORDERINGS, AmbiguityTriple, ClassicalState, ModelParams
from .quantum import QuantumConfig, SpectrumTable, analytic_energy, analytic_spectrum, wavefunction

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError", "AmbiguityTriple", "AmplitudeDomainError", "ClassicalState",
    "DomainError", "EigenGrid", "EigenResult", "GridTooCoarse", "IntegrationError",
    "ModelParams", "ORDERINGS", "OrbitSolution", "QuantumConfig", "SingularEndpointWarning",
    "SpectrumTable", "Trajectory", "analytic_energy", "analytic_orbit", "analytic_spectrum",
    "integrate", "linearization_witness", "measure_period", "refine", "rhs", "solve_x_space",
    "solve_xi_space", "wavefunction",
]
