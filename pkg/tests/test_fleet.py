import math
import random

import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import mannwhitneyu

from multivariant.diversify import Limits, OracleConfig, diversify_module
from multivariant.fleet import (FleetConfig, collect_fuel, fleet_metrics, mann_whitney_u,
                                normalized_entropy, simulate, timing_distributions,
                                uniqueness_ratio)
from multivariant.interp import HostConfig, Instance, hash_trace
from multivariant.mvlink import link_multivariant
from multivariant.rng import node_seed
from multivariant.wat import parse_module

from conftest import corpus_module

FAST = OracleConfig(random_samples=128)
COIN = """(module
  (import "env" "random_u32" (func $r (result i32)))
  (func $main (export "main") (result i32)
    i32.const 1
    call $r
    i32.const 1
    i32.and
    i32.div_s))
"""


@pytest.fixture(scope="module")
def walk_mv():
    m = corpus_module("walk.wat")
    return m, link_multivariant(m, diversify_module(m, limits=Limits(max_variants=3), oracle=FAST))


def test_original_module_single_trace(walk_mv):
    m, _ = walk_mv
    corpus = simulate(m, FleetConfig(nodes=8, queries=20, endpoint="deep", input=(3,)))
    assert len(set(corpus.pooled())) == 1
    assert all(len(set(h)) == 1 for h in corpus.per_node())
    metrics = fleet_metrics(corpus)
    assert metrics["entropy"] == 0.0
    assert metrics["per_node_R"] == [1 / 20] * 8


def test_one_node_one_query(walk_mv):
    _, mv = walk_mv
    corpus = simulate(mv, FleetConfig(nodes=1, queries=1, endpoint="deep", input=(3,)))
    assert len(corpus.pooled()) == 1


def test_corpus_deterministic_and_round_robin(walk_mv):
    _, mv = walk_mv
    cfg = FleetConfig(nodes=5, queries=6, endpoint="deep", input=(3,), master_seed=99)
    a, b = simulate(mv, cfg), simulate(mv, cfg)
    assert a.to_csv() == b.to_csv()
    assert [(r.query, r.node) for r in a.records] == [(q, n) for q in range(6) for n in range(5)]
    assert a.to_csv().splitlines()[0] == "node,query,hash,fuel,result"


def test_node_rng_seed_and_persistence(walk_mv):
    _, mv = walk_mv
    cfg = FleetConfig(nodes=3, queries=4, endpoint="deep", input=(3,), master_seed=12)
    corpus = simulate(mv, cfg)
    inst = Instance(mv, HostConfig(rng_seed=node_seed(12, 2)))
    expected = [hash_trace(inst.invoke("deep", [3])[1]) for _ in range(4)]
    assert corpus.node_hashes(2) == expected


def test_parallel_matches_sequential(walk_mv):
    _, mv = walk_mv
    cfg = FleetConfig(nodes=4, queries=5, endpoint="deep", input=(3,))
    par = FleetConfig(nodes=4, queries=5, endpoint="deep", input=(3,), workers=2)
    assert simulate(mv, cfg).to_csv() == simulate(mv, par).to_csv()


def test_traps_recorded_as_failures():
    corpus = simulate(parse_module(COIN), FleetConfig(nodes=4, queries=25))
    assert 0 < corpus.failures < 100
    assert len(corpus.pooled()) == 100 - corpus.failures
    assert "trap:div-by-zero" in corpus.to_csv()
    assert fleet_metrics(corpus)["failures"] == corpus.failures


def test_unknown_endpoint(walk_mv):
    with pytest.raises(KeyError):
        simulate(walk_mv[1], FleetConfig(endpoint="nope"))


def test_config_validation():
    with pytest.raises(ValueError):
        FleetConfig(nodes=0)


def test_uniqueness_ratio_examples():
    assert uniqueness_ratio([str(i) for i in range(95)] + ["0"] * 5) == 0.95
    assert uniqueness_ratio(["h"] * 100) == 1 / 100
    assert uniqueness_ratio([str(i) for i in range(100)]) == 1.0
    with pytest.raises(ValueError):
        uniqueness_ratio([])


def test_entropy_examples():
    assert normalized_entropy(["x"] * 6400) == 0.0
    assert normalized_entropy([str(i) for i in range(6400)]) == pytest.approx(1.0, abs=1e-12)
    assert abs(normalized_entropy(["a", "a", "b", "b"]) - math.log(2) / math.log(4)) < 1e-12
    assert abs(normalized_entropy(["a", "a", "b", "b"]) - 0.5) < 1e-12
    with pytest.raises(ValueError):
        normalized_entropy(["a"])


@given(st.lists(st.sampled_from("abcdefgh"), min_size=2, max_size=60))
def test_entropy_bounds(hashes):
    e = normalized_entropy(hashes)
    assert 0.0 <= e <= 1.0
    assert (e == 0.0) == (len(set(hashes)) == 1)
    if len(set(hashes)) == len(hashes):
        assert e == pytest.approx(1.0)


def test_mann_whitney_examples():
    assert mann_whitney_u([1, 2, 3], [4, 5, 6])[0] == 0
    u, p = mann_whitney_u([3, 1, 2, 5], [3, 1, 2, 5])
    assert p == pytest.approx(1.0)
    assert mann_whitney_u([7, 7, 7], [7, 7]) == (3.0, 1.0)


def test_mann_whitney_shifted_against_scipy():
    rng = random.Random(42)
    a = [rng.gauss(0, 1) for _ in range(300)]
    b = [rng.gauss(0.4, 1) for _ in range(300)]
    u, p = mann_whitney_u(a, b)
    ref = mannwhitneyu(a, b, alternative="two-sided", method="asymptotic", use_continuity=True)
    assert p < 0.05
    assert u == pytest.approx(ref.statistic) and p == pytest.approx(ref.pvalue, rel=1e-9)


@settings(max_examples=150)
@given(st.lists(st.integers(0, 6), min_size=1, max_size=30), st.lists(st.integers(0, 9), min_size=1, max_size=30))
def test_mann_whitney_with_ties_matches_scipy(a, b):
    if len(set(a + b)) == 1:
        return
    u, p = mann_whitney_u(a, b)
    ref = mannwhitneyu(a, b, alternative="two-sided", method="asymptotic", use_continuity=True)
    assert u == pytest.approx(ref.statistic)
    assert p == pytest.approx(ref.pvalue, rel=1e-9, abs=1e-12)


UNEQUAL = """(module
  (func $f (export "main") (param i32) (result i32) local.get 0 local.get 0 i32.const 2 i32.mul i32.add))
"""


def _two_choice(variant_body):
    m = parse_module(UNEQUAL)
    combined = parse_module(UNEQUAL, extra=[
        f'(func $f__v0 (@origin variant "f" "MANUAL") (param i32) (result i32) {variant_body})'])
    from multivariant.diversify import VariantSet
    return m, link_multivariant(m, {"f": VariantSet(m.function("f"), [combined.function("f__v0")])})


def test_timing_original_sigma_zero_and_variant_sigma_positive():
    m, mv = _two_choice("local.get 0 i32.const 3 i32.mul")
    orig, multi = timing_distributions(m, mv, 200, 1, "main", (5,))
    assert orig.sigma == 0.0 and multi.sigma > 0.0
    assert len(multi.groups) == 2


def test_timing_equal_length_variants_sigma_zero():
    # the three-get body has as many instructions as the original
    m, mv = _two_choice("local.get 0 local.get 0 local.get 0 i32.add i32.add")
    _, multi = timing_distributions(m, mv, 200, 1, "main", (5,))
    assert multi.sigma == 0.0 and len(multi.groups) == 2


def test_collect_fuel_needs_two_runs_for_sigma():
    m, _ = _two_choice("local.get 0 local.get 0 local.get 0 i32.add i32.add")
    with pytest.raises(ValueError):
        collect_fuel(m, "main", (1,), 1, 0).sigma
