import pytest
from hypothesis import given, settings, strategies as st

from multivariant.diversify import (Counterexample, Equivalent, Limits, OracleConfig,
                                    check_equivalence, diversify_module, enumerate_variants,
                                    mod_inverse, oracle_inputs, split_add_const, split_mul_const)
from multivariant.diversify.rules import (RULES, add_sub_invert, const_add_split, const_infer,
                                          fold_window, loop_unroll, mul2_to_add, mul_factor_split,
                                          resolve_rules)
from multivariant.interp import HostConfig, Instance, Trap
from multivariant.rng import SplitMix64
from multivariant.wat import Function, FuncType, Instr, Module, canonical_hash, const, parse_module, validate
from multivariant.wat.ir import BINOPS, u32

from conftest import corpus_module

M32 = 2**32
FAST = OracleConfig(random_samples=256)


def fn(text_body, params=1, locals_=0, name="g"):
    m = parse_module(f"(module (func ${name} {'(param i32) ' * params}(result i32) "
                     f"{'(local i32) ' * locals_}{text_body}))")
    return m.functions[0]


def ops(body):
    return [str(i) for i in body]


# modular arithmetic

def test_mod_inverse_known_values():
    assert mod_inverse(1) == 1
    x = mod_inverse(3)
    assert x == 2863311531
    assert 3 * 2863311531 % M32 == 1


def test_mod_inverse_even_rejected():
    with pytest.raises(ValueError, match="not invertible"):
        mod_inverse(2)


@given(st.integers(0, M32 // 2 - 1))
def test_mod_inverse_property(k):
    a = 2 * k + 1
    assert a * mod_inverse(a) % M32 == 1


def test_multiplication_overflow_pair():
    a, c = 109653155, u32(-10)
    b = c * mod_inverse(a) % M32
    assert b == u32(-1931544174)
    assert a * u32(-1931544174) % M32 == c


def test_split_mul_const_zero():
    a, b = split_mul_const(0, SplitMix64(3))
    assert a % 2 == 1 and b == 0


def test_split_mul_const_many():
    rng = SplitMix64(11)
    for _ in range(1000):
        c = rng.next_u32()
        a, b = split_mul_const(c, rng)
        assert a % 2 == 1 and (a, b) != (1, c)
        assert a * b % M32 == c


def test_split_add_const_values():
    assert sum([9, 4, 12, 7]) == sum([13, 8, 1, 10]) == 32
    parts = split_add_const(32, 4, SplitMix64(1))
    assert len(parts) == 4 and sum(parts) % M32 == 32


def test_split_add_const_zero_two_parts():
    k, rest = split_add_const(0, 2, SplitMix64(2))
    assert rest == (-k) % M32


def test_split_add_const_many():
    rng = SplitMix64(5)
    for _ in range(1000):
        c, n = rng.next_u32(), rng.randint(2, 8)
        parts = split_add_const(c, n, rng)
        assert len(parts) == n and sum(parts) % M32 == c


# rules

def test_const_add_split_chain():
    body = (Instr("local.get", 0), const(32), Instr("i32.add"))
    [out] = const_add_split(body, 1, SplitMix64(0))
    consts = [i.arg for i in out if i.op == "i32.const"]
    assert sum(consts) % M32 == 32 and 2 <= len(consts) <= 4
    assert [i.op for i in out[1:]] == ["i32.const", "i32.add"] * len(consts)


def test_const_add_split_bare_constant():
    [out] = const_add_split((const(7),), 0, SplitMix64(0))
    assert out[0].op == "i32.const" and out[-1].op == "i32.add"
    assert sum(i.arg for i in out if i.op == "i32.const") % M32 == 7


def test_add_sub_invert():
    body = (Instr("local.get", 0), const(-5), Instr("i32.sub"))
    [out] = add_sub_invert(body, 1, SplitMix64(0))
    assert ops(out) == ["local.get 0", "i32.const 5", "i32.add"]
    [back] = add_sub_invert(out, 1, SplitMix64(0))
    assert back == body


def test_mul_factor_split_shape():
    body = (Instr("local.get", 0), const(-10), Instr("i32.mul"))
    [out] = mul_factor_split(body, 1, SplitMix64(9))
    b, a = out[1].arg, out[3].arg
    assert [i.op for i in out[1:]] == ["i32.const", "i32.mul", "i32.const", "i32.mul"]
    assert a * b % M32 == u32(-10)


def test_mul2_to_add_triple_get(double_add):
    f = double_add.functions[0]
    [out] = mul2_to_add(f.body, 1, SplitMix64(0))
    assert ops(out) == ["local.get 0", "local.get 0", "local.get 0", "i32.add", "i32.add"]
    assert mul2_to_add(f.body, 0, SplitMix64(0)) == []


def test_const_infer_folds_and_skips_traps():
    assert ops(const_infer((const(3), const(4), Instr("i32.mul")), 0, SplitMix64(0))[0]) == ["i32.const 12"]
    assert const_infer((const(3), const(0), Instr("i32.div_s")), 0, SplitMix64(0)) == []


def _interp_binop(op, a, b):
    m = Module((Function("k", FuncType((), "i32"), 0, (const(a), const(b), Instr(op))),), (("k", 0),))
    try:
        return u32(Instance(m).invoke("k")[0])
    except Trap:
        return None


def test_const_infer_matches_interpreter_every_binop():
    rng = SplitMix64(77)
    values = [0, 1, 2, 31, 32, 33, u32(-1), u32(-2), 2**31 - 1, 2**31]
    values += [rng.below(256) for _ in range(12)] + [u32(-rng.below(256)) for _ in range(6)]
    for op in BINOPS:
        for a in values:
            for b in values[:12]:
                folded = fold_window((const(a), const(b), Instr(op)))
                expected = _interp_binop(op, a, b)
                assert (folded.arg if folded else None) == expected, (op, a, b)


def test_loop_unroll_shape_and_equivalence():
    m = corpus_module("arith.wat")
    f = m.function("popcount16")
    pos = next(i for i, ins in enumerate(f.body) if ins.op == "loop")
    [out] = loop_unroll(f.body, pos, SplitMix64(0))
    g = f.with_body(out)
    assert validate(Module((g,))) == []
    assert len(out) > len(f.body)
    assert check_equivalence(f, g, FAST)


def test_loop_unroll_skips_other_shapes():
    f = corpus_module("arith.wat").function("sum_to")  # exits through an outer block, ends in br
    loops = [i for i, ins in enumerate(f.body) if ins.op == "loop"]
    assert all(loop_unroll(f.body, i, SplitMix64(0)) == [] for i in loops)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32))
def test_loop_unroll_equivalent_on_generated_loops(seed):
    rng = SplitMix64(seed)
    n = rng.randint(1, 9)
    k = rng.randint(1, 100)
    f = fn(f"i32.const {n} local.set 1 loop local.get 0 i32.const {k} i32.mul i32.const 1 i32.add "
           f"local.set 0 local.get 1 i32.const 1 i32.sub local.tee 1 br_if 0 end local.get 0",
           locals_=1)
    [out] = loop_unroll(f.body, 2, rng)
    assert check_equivalence(f, f.with_body(out), OracleConfig(random_samples=64))


def test_resolve_rules_fixed_order_and_unknown():
    assert [r.id for r in resolve_rules(["LOOP_UNROLL", "CONST_ADD_SPLIT"])] == ["CONST_ADD_SPLIT", "LOOP_UNROLL"]
    with pytest.raises(KeyError):
        resolve_rules(["NOPE"])
    assert set(RULES) == {"CONST_ADD_SPLIT", "ADD_SUB_INVERT", "MUL_FACTOR_SPLIT", "MUL2_TO_ADD",
                          "CONST_INFER", "LOOP_UNROLL"}


# oracle

def test_oracle_double_add_vs_triple_get(double_add):
    f = double_add.functions[0]
    g = f.with_body([Instr("local.get", 0)] * 3 + [Instr("i32.add")] * 2)
    result = check_equivalence(f, g)
    assert isinstance(result, Equivalent) and result


def test_oracle_inversion_of_operations():
    assert check_equivalence(fn("local.get 0 i32.const 1 i32.add"), fn("local.get 0 i32.const -1 i32.sub"), FAST)


def test_oracle_counterexample():
    result = check_equivalence(fn("local.get 0 i32.const 1 i32.add"), fn("local.get 0 i32.const 2 i32.add"), FAST)
    assert isinstance(result, Counterexample) and not result
    assert result.expected != result.actual


def test_oracle_trap_asymmetry_is_counterexample():
    f = fn("local.get 0")
    g = fn("local.get 0 i32.const 1 local.get 0 i32.div_s i32.const 0 i32.mul i32.add")
    result = check_equivalence(f, g, FAST)
    assert not result and result.args == (0,)
    assert result.actual[1] == "div-by-zero"


def test_oracle_config_requires_boundary_values():
    with pytest.raises(ValueError):
        OracleConfig(boundary=(0, 1))


def test_oracle_inputs_cover_boundary_cross_product():
    cfg = OracleConfig(random_samples=10)
    pairs = oracle_inputs(2, cfg)
    assert len(pairs) == len(cfg.boundary) ** 2 + 10
    assert (u32(-2**31), u32(-1)) in pairs
    triples = oracle_inputs(3, cfg)
    assert len(triples) == len(cfg.boundary) + 10


def test_oracle_compares_memory():
    text = ('(module (memory 1) (func $a (param i32) (result i32) i32.const 0 local.get 0 i32.store i32.const 0)'
            ' (func $b (param i32) (result i32) i32.const 0))')
    m = parse_module(text)
    assert not check_equivalence(m.function("a"), m.function("b"), FAST, context=m)


# enumeration

def test_enumerate_double_add_mul2_to_add(double_add):
    f = double_add.functions[0]
    vs = enumerate_variants(f, ["MUL2_TO_ADD"])
    bodies = [ops(v.body) for v in vs.variants]
    assert ["local.get 0", "local.get 0", "local.get 0", "i32.add", "i32.add"] in bodies
    assert vs.variants[0].origin.rules == ("MUL2_TO_ADD",)
    assert vs.variants[0].name == "f__v0"


def test_enumerate_memory_function_rejected():
    m = parse_module("(module (memory 1) (func $s (param i32) local.get 0 local.get 0 i32.store))")
    vs = enumerate_variants(m.functions[0], context=m)
    assert vs.variants == [] and vs.skipped


def test_enumerate_inapplicable_rule():
    f = Function("c", FuncType((), "i32"), 0, (const(7),))
    assert enumerate_variants(f, ["ADD_SUB_INVERT"]).variants == []


def test_enumerate_unique_sound_and_deterministic():
    m = corpus_module("arith.wat")
    f = m.function("mix")
    limits = Limits(max_variants=12)
    a = enumerate_variants(f, limits=limits, seed=3, context=m, oracle=FAST)
    b = enumerate_variants(f, limits=limits, seed=3, context=m, oracle=FAST)
    assert a.to_json() == b.to_json()
    hashes = [canonical_hash(v) for v in a.variants] + [canonical_hash(f)]
    assert len(set(hashes)) == len(hashes) == 13
    fresh = OracleConfig(random_samples=512, seed=999)
    assert all(check_equivalence(f, v, fresh, context=m) for v in a.variants)
    c = enumerate_variants(f, limits=limits, seed=4, context=m, oracle=FAST)
    assert c.to_json() != a.to_json()


def test_enumerate_respects_limits():
    f = corpus_module("arith.wat").function("affine")
    assert len(enumerate_variants(f, limits=Limits(max_variants=5), oracle=FAST)) == 5
    depth1 = enumerate_variants(f, limits=Limits(max_depth=1), oracle=FAST)
    assert all(len(v.origin.rules) == 1 for v in depth1.variants)


def test_variant_set_json_shape():
    f = corpus_module("arith.wat").function("triple")
    doc = enumerate_variants(f, limits=Limits(max_variants=2), oracle=FAST).to_dict()
    assert doc["function"] == "triple"
    assert set(doc["variants"][0]) == {"name", "rules", "body_hash", "wat"}
    assert len(doc["variants"][0]["body_hash"]) == 64


def test_diversify_module_only_originals():
    m = corpus_module("walk.wat")
    sets = diversify_module(m, limits=Limits(max_variants=2), oracle=FAST, only=["walk"])
    assert list(sets) == ["walk"]


def test_oracle_needs_context_for_callers():
    module = corpus_module("walk.wat")
    walk = module.function("walk")
    with pytest.raises(ValueError, match="context"):
        check_equivalence(walk, walk)
    assert isinstance(check_equivalence(walk, walk, OracleConfig(random_samples=16), context=module),
                      Equivalent)
