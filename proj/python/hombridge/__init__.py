"""Homoclinic travelling waves of u'''' + c^2 u'' + f(u) = 0."""

from ._hombridge import (
    AssumptionReport,
    DomainError,
    Error,
    Grid,
    InadmissibleSpeed,
    InvalidArgument,
    IoError,
    Nonlinearity,
    ParseError,
    SolverFailure,
    ValidationError,
    Wave,
    admissible,
    check_assumptions,
    continue_in_c,
    diagnose,
    hamiltonian,
    initial_guess,
    load_solution,
    lower_bound,
    multiplier_max,
    nonexistence_predicate,
    residual,
    save_solution,
    solve,
    tail_parameters,
)

__all__ = [name for name in dir() if not name.startswith("_")]
