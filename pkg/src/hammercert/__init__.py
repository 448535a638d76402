"""Existence certificates and numerical solutions for coupled Hammerstein systems.

Two integral equations with sign-changing kernels, one from a three-point
and one from a derivative-type nonlocal boundary condition, are coupled
through nonlinearities ``f_1, f_2``.  The package computes the kernel
constants, checks the growth conditions that guarantee nontrivial solutions
on a ladder of radii, estimates spectral radii of the associated linear
operators, and solves the system numerically by Nystrom collocation.
"""

from .certificates import CertificateReport, ProblemSpec, RadiiLadder, certify, problem_constants
from .config import load_example, load_problem, parse_problem
from .errors import HammerError, NumericError, ValidationError
from .kernels import DerivativeKernel, ThreePointKernel, WeightFunction, unit_weight

__all__ = [
    "CertificateReport", "DerivativeKernel", "HammerError", "NumericError", "ProblemSpec", "RadiiLadder",
    "ThreePointKernel", "ValidationError", "WeightFunction", "certify", "load_example", "load_problem",
    "parse_problem", "problem_constants", "unit_weight",
]
__version__ = "0.1.0"
