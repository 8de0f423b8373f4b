"""Answer set engine for the rule language used by the knowledge modules."""
from .errors import (
    ConstantRedefinitionError,
    ExternalSolverError,
    GroundingError,
    GroundingLimitError,
    LogicError,
    ParseError,
    SafetyError,
    SolverNotFound,
    SolverOutputError,
    SolveTimeout,
    UnsupportedConstructError,
)
from .external import solve_external
from .ground import GroundProgram
from .grounder import ground
from .naive import ground_naive, least_model
from .parser import parse_atom, parse_program
from .solver import OPTIMUM_FOUND, SAT, UNSAT, AnswerSet, SolveResult, check_stability, solve
from .terms import Function, Program, String, atom, render

__all__ = [
    "AnswerSet",
    "ConstantRedefinitionError",
    "ExternalSolverError",
    "Function",
    "GroundProgram",
    "GroundingError",
    "GroundingLimitError",
    "LogicError",
    "OPTIMUM_FOUND",
    "ParseError",
    "Program",
    "SAT",
    "SafetyError",
    "SolveResult",
    "SolveTimeout",
    "SolverNotFound",
    "SolverOutputError",
    "String",
    "UNSAT",
    "UnsupportedConstructError",
    "atom",
    "check_stability",
    "ground",
    "ground_naive",
    "least_model",
    "parse_atom",
    "parse_program",
    "render",
    "solve",
    "solve_external",
]
