"""Exact Dirac constraint analysis of polynomial Lagrangians via Gröbner bases."""

from ._backend import BACKEND
from .analysis import (
    CONVENTION,
    AnalysisError,
    Inconsistent,
    IterationLimit,
    Options,
    analyze,
)
from .groebner import Budget, ResourceLimitExceeded, buchberger, normal_form
from .ingest import ParseError, load_model, parse_expression, parse_model
from .report import build_report, to_json, to_text

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CONVENTION", "AnalysisError", "Inconsistent", "IterationLimit", "Options",
    "analyze", "Budget", "ResourceLimitExceeded", "buchberger", "normal_form", "ParseError",
    "load_model", "parse_expression", "parse_model", "build_report", "to_json", "to_text",
]
