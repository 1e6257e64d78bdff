"""Exact substitution tilings with dense tile orientations."""

from .numberfield import CycNum, ExtScalar, FieldContext, field_init, real_sign
from .geometry import ConvexPolygon, Isometry
from .ruleset import SubstitutionRule, builtin_rule, load_rule, parse_rule_file, validate_rule

__version__ = "0.1.0"

__all__ = [
    "CycNum",
    "ExtScalar",
    "FieldContext",
    "field_init",
    "real_sign",
    "ConvexPolygon",
    "Isometry",
    "SubstitutionRule",
    "builtin_rule",
    "load_rule",
    "parse_rule_file",
    "validate_rule",
]
