"""Invariant suites."""
from .validator import AnsatzValidator, SpecialFunctionValidator

__all__ = ["AnsatzValidator", "SpecialFunctionValidator"]
