"""Numerical referee for indefinite-integral identities of Heun functions."""

from heunref.catalog import instantiate, reduce_to_2f1
from heunref.errors import (
    BranchError,
    ConfigError,
    ConstraintError,
    ConvergenceError,
    DegenerateParameterError,
    DomainError,
    EmptyPlanError,
    HeunRefError,
    IntervalError,
    ParameterDomainError,
    PropagationError,
)
from heunref.oracle import ode_oracle
from heunref.quadrature import quad_adaptive
from heunref.specfun import (
    HeunParams,
    ellip_e_complete,
    ellip_f_incomplete,
    ellip_k_complete,
    heun_l,
    heun_l_prime,
    hyp2f1,
)
from heunref.verifier import SamplePlan, Verdict, VerificationReport, residual_derivative, verify

__version__ = "0.1.0"

__all__ = [
    "BranchError",
    "ConfigError",
    "ConstraintError",
    "ConvergenceError",
    "DegenerateParameterError",
    "DomainError",
    "EmptyPlanError",
    "HeunParams",
    "HeunRefError",
    "IntervalError",
    "ParameterDomainError",
    "PropagationError",
    "SamplePlan",
    "Verdict",
    "VerificationReport",
    "ellip_e_complete",
    "ellip_f_incomplete",
    "ellip_k_complete",
    "heun_l",
    "heun_l_prime",
    "hyp2f1",
    "instantiate",
    "ode_oracle",
    "quad_adaptive",
    "reduce_to_2f1",
    "residual_derivative",
    "verify",
]
