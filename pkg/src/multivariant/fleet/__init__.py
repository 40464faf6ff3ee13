"""Fleet simulation, trace-diversity metrics and fuel timing."""

from .metrics import fleet_metrics, mann_whitney_u, metrics_json, normalized_entropy, uniqueness_ratio
from .simulate import (DEFAULT_MASTER_SEED, FleetConfig, QueryRecord, TraceCorpus, simulate,
                       simulate_node)
from .timing import (TimingStats, collect_fuel, group_tests, timing_distributions, timing_json,
                     timing_report)

__all__ = [
    "fleet_metrics", "mann_whitney_u", "metrics_json", "normalized_entropy", "uniqueness_ratio",
    "DEFAULT_MASTER_SEED", "FleetConfig", "QueryRecord", "TraceCorpus", "simulate",
    "simulate_node", "TimingStats", "collect_fuel", "group_tests", "timing_distributions",
    "timing_json", "timing_report",
]
