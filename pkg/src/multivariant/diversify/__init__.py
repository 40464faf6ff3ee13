"""Variant synthesis: rewrite rules, enumeration, and the equivalence oracle."""

from .arith import mod_inverse, split_add_const, split_mul_const
from .enumerate import Limits, VariantSet, diversify_module, enumerate_variants, variant_name
from .oracle import (DEFAULT_BOUNDARY, Counterexample, Equivalent, EquivalenceOracle, OracleConfig,
                     check_equivalence, oracle_inputs)
from .rules import RULE_ORDER, RULES, RewriteRule, resolve_rules

__all__ = [
    "mod_inverse", "split_add_const", "split_mul_const", "Limits", "VariantSet",
    "diversify_module", "enumerate_variants", "variant_name", "DEFAULT_BOUNDARY",
    "Counterexample", "Equivalent", "EquivalenceOracle", "OracleConfig", "check_equivalence",
    "oracle_inputs", "RULE_ORDER", "RULES", "RewriteRule", "resolve_rules",
]
