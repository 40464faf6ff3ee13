"""Breadth-first enumeration of stacked rewrites, certified by the oracle."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from ..rng import SplitMix64, derive_seed
from ..wat.ir import Function, Module, Origin
from ..wat.printer import canonical_hash, print_function
from .oracle import EquivalenceOracle, OracleConfig
from .rules import RULE_ORDER, RewriteRule, resolve_rules


@dataclass(frozen=True)
class Limits:
    max_variants: int = 64
    max_depth: int = 3
    time_budget: float = 10.0  # seconds per function


@dataclass
class VariantSet:
    original: Function
    variants: list[Function] = field(default_factory=list)
    candidates: int = 0
    rejected: int = 0
    exhausted_budget: bool = False
    skipped: str | None = None  # reason the function was not diversified

    @property
    def function(self) -> str:
        return self.original.name

    def __len__(self) -> int:
        return len(self.variants)

    def to_dict(self, with_bodies: bool = True) -> dict:
        out = {
            "function": self.function,
            "variants": [],
            "candidates": self.candidates,
            "rejected": self.rejected,
        }
        for v in self.variants:
            entry = {"name": v.name, "rules": list(v.origin.rules), "body_hash": canonical_hash(v)}
            if with_bodies:
                entry["wat"] = print_function(v, indent="")
            out["variants"].append(entry)
        if self.skipped:
            out["skipped"] = self.skipped
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)


def variant_name(original: str, k: int) -> str:
    return f"{original}__v{k}"


def enumerate_variants(func: Function, rules=RULE_ORDER, limits: Limits | None = None, *,
                       seed: int = 0, context: Module | None = None,
                       oracle: OracleConfig | None = None) -> VariantSet:
    """Enumerate oracle-certified variants of ``func``.

    Rewrites are stacked up to ``limits.max_depth`` deep, breadth first:
    every body of one depth is expanded (windows left to right, rules in
    fixed order) before the next depth starts. Rule randomness comes from a
    stream derived from ``seed`` and the function name.
    """
    limits = limits or Limits()
    rules: tuple[RewriteRule, ...] = resolve_rules(
        r.id if isinstance(r, RewriteRule) else r for r in rules)
    result = VariantSet(func)
    if func.touches_memory():
        result.skipped = "function accesses linear memory"
        return result
    if not rules or limits.max_variants <= 0:
        return result

    rng = SplitMix64(derive_seed(seed, func.name))
    checker = EquivalenceOracle(func, oracle, context)
    seen = {canonical_hash(func)}
    deadline = time.monotonic() + limits.time_budget
    frontier: list[tuple[tuple, tuple[str, ...]]] = [(func.body, ())]

    for _ in range(limits.max_depth):
        next_frontier = []
        for body, chain in frontier:
            for pos in range(len(body)):
                for rule in rules:
                    for new_body in rule.apply(body, pos, rng):
                        candidate = func.with_body(
                            new_body, name=variant_name(func.name, len(result.variants)),
                            origin=Origin.variant(func.name, chain + (rule.id,)))
                        digest = canonical_hash(candidate)
                        if digest in seen:
                            continue
                        seen.add(digest)
                        if time.monotonic() > deadline:
                            result.exhausted_budget = True
                            return result
                        result.candidates += 1
                        if checker.check(candidate):
                            result.variants.append(candidate)
                            next_frontier.append((candidate.body, candidate.origin.rules))
                            if len(result.variants) >= limits.max_variants:
                                return result
                        else:
                            result.rejected += 1
        if not next_frontier:
            break
        frontier = next_frontier
    return result


def diversify_module(module: Module, rules=RULE_ORDER, limits: Limits | None = None, *,
                     seed: int = 0, oracle: OracleConfig | None = None,
                     only: list[str] | None = None) -> dict[str, VariantSet]:
    """Variant sets for every function (or the ``only`` subset) of ``module``."""
    out = {}
    for func in module.functions:
        if func.origin.kind != "original" or (only is not None and func.name not in only):
            continue
        out[func.name] = enumerate_variants(func, rules, limits, seed=seed, context=module,
                                            oracle=oracle)
    return out
