"""Simulated edge fleet: N stateful nodes answering the same query Q times."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from ..interp import HostConfig, Instance, Trap, hash_trace
from ..interp.instance import DEFAULT_FUEL
from ..rng import node_seed
from ..wat.ir import Module, s32

DEFAULT_MASTER_SEED = 0x4D45_5745  # fixed so default runs are reproducible


@dataclass(frozen=True)
class FleetConfig:
    nodes: int = 64
    queries: int = 100
    master_seed: int = DEFAULT_MASTER_SEED
    endpoint: str = "main"
    input: tuple[int, ...] = ()
    fuel_limit: int = DEFAULT_FUEL
    workers: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "input", tuple(self.input))
        if self.nodes < 1 or self.queries < 1:
            raise ValueError("nodes and queries must be at least 1")


@dataclass(frozen=True)
class QueryRecord:
    node: int
    query: int
    hash: str | None
    fuel: int | None
    result: int | None
    trap: str | None = None

    @property
    def ok(self) -> bool:
        return self.trap is None


@dataclass
class TraceCorpus:
    config: FleetConfig
    records: list[QueryRecord] = field(default_factory=list)  # round-robin order

    def node_hashes(self, node: int) -> list[str]:
        return [r.hash for r in self.records if r.node == node and r.ok]

    def per_node(self) -> list[list[str]]:
        out: list[list[str]] = [[] for _ in range(self.config.nodes)]
        for r in self.records:
            if r.ok:
                out[r.node].append(r.hash)
        return out

    def pooled(self) -> list[str]:
        return [r.hash for r in self.records if r.ok]

    @property
    def failures(self) -> int:
        return sum(1 for r in self.records if not r.ok)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["node", "query", "hash", "fuel", "result"])
        for r in self.records:
            result = s32(r.result) if r.ok and r.result is not None else ("" if r.ok else f"trap:{r.trap}")
            w.writerow([r.node, r.query, r.hash or "", "" if r.fuel is None else r.fuel, result])
        return buf.getvalue()


def _query(inst: Instance, cfg: FleetConfig, node: int, query: int) -> QueryRecord:
    try:
        result, trace = inst.invoke(cfg.endpoint, cfg.input)
    except Trap as trap:
        return QueryRecord(node, query, None, None, None, trap.kind)
    return QueryRecord(node, query, hash_trace(trace), trace.fuel, result)


def _instance(module: Module, cfg: FleetConfig, node: int) -> Instance:
    return Instance(module, HostConfig(rng_seed=node_seed(cfg.master_seed, node),
                                       fuel_limit=cfg.fuel_limit))


def simulate_node(module: Module, cfg: FleetConfig, node: int) -> list[QueryRecord]:
    """All Q queries of one node; depends only on (module, cfg, node)."""
    inst = _instance(module, cfg, node)
    return [_query(inst, cfg, node, q) for q in range(cfg.queries)]


def simulate(module: Module, cfg: FleetConfig) -> TraceCorpus:
    """Query i goes to every node before query i + 1.

    Node n draws from an RNG seeded with ``node_seed(master_seed, n)`` whose
    state persists across that node's queries. With ``workers > 1`` nodes
    run in separate processes; since nodes share no state, the corpus is
    the same either way.
    """
    module.resolve_export(cfg.endpoint)
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            per_node = list(pool.map(simulate_node, [module] * cfg.nodes, [cfg] * cfg.nodes,
                                     range(cfg.nodes)))
        records = [per_node[n][q] for q in range(cfg.queries) for n in range(cfg.nodes)]
        return TraceCorpus(cfg, records)
    instances = [_instance(module, cfg, n) for n in range(cfg.nodes)]
    records = [_query(instances[n], cfg, n, q) for q in range(cfg.queries) for n in range(cfg.nodes)]
    return TraceCorpus(cfg, records)
