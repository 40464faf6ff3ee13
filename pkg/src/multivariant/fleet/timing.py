"""Fuel-based execution-time distributions."""

from __future__ import annotations

import json
import statistics
from collections import defaultdict
from dataclasses import dataclass, field

from ..interp import HostConfig, Instance, hash_trace
from ..wat.ir import Module
from .metrics import mann_whitney_u


@dataclass
class TimingStats:
    samples: list[int]
    groups: dict[str, list[int]] = field(default_factory=dict)  # trace hash -> fuel samples

    @property
    def median(self) -> float:
        return float(statistics.median(self.samples))

    @property
    def sigma(self) -> float:
        if len(self.samples) < 2:
            raise ValueError("sigma needs at least two samples")
        return statistics.stdev(self.samples)

    def summary(self) -> dict:
        return {"runs": len(self.samples), "median": self.median, "sigma": self.sigma,
                "groups": {h: {"runs": len(v), "median": float(statistics.median(v))}
                           for h, v in sorted(self.groups.items())}}


def collect_fuel(module: Module, endpoint: str, args, runs: int, seed: int) -> TimingStats:
    """Fuel of ``runs`` consecutive invocations on one instance (RNG persists)."""
    inst = Instance(module, HostConfig(rng_seed=seed))
    samples: list[int] = []
    groups: dict[str, list[int]] = defaultdict(list)
    for _ in range(runs):
        _, trace = inst.invoke(endpoint, args)
        samples.append(trace.fuel)
        groups[hash_trace(trace)].append(trace.fuel)
    return TimingStats(samples, dict(groups))


def timing_distributions(original: Module, multivariant: Module, runs: int, seed: int,
                         endpoint: str, args=()) -> tuple[TimingStats, TimingStats]:
    if runs < 2:
        raise ValueError("need at least two runs")
    return (collect_fuel(original, endpoint, args, runs, seed),
            collect_fuel(multivariant, endpoint, args, runs, seed))


def group_tests(stats: TimingStats) -> list[dict]:
    """Pairwise rank-sum tests between the per-trace fuel groups."""
    keys = sorted(stats.groups)
    out = []
    for i, a in enumerate(keys):
        for b in keys[i + 1:]:
            u, p = mann_whitney_u(stats.groups[a], stats.groups[b])
            out.append({"a": a, "b": b, "U": u, "p": p})
    return out


def timing_report(orig: TimingStats, multi: TimingStats) -> dict:
    u, p = mann_whitney_u(orig.samples, multi.samples)
    return {"original": orig.summary(), "multivariant": multi.summary(), "U": u, "p": p,
            "group_tests": group_tests(multi)}


def timing_json(orig: TimingStats, multi: TimingStats) -> str:
    return json.dumps(timing_report(orig, multi), indent=2)
