"""Command-line front end: ``multivariant <subcommand> ...``.

Exit codes: 0 success, 1 domain failure (parse, validation, link, traps),
2 I/O or usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .diversify import Limits, OracleConfig, VariantSet, diversify_module, resolve_rules
from .diversify.rules import RULE_ORDER
from .fleet import FleetConfig, fleet_metrics, simulate, timing_distributions, timing_report
from .interp import InstantiationError, Trap
from .mvlink import LinkError, count_paths, export_dot, link_multivariant, path_report
from .optpreserve import PassSet, preservation_report
from .wat import (Module, ParseError, ValidationError, build_call_graph, parse_module,
                  print_module, validate)
from .wat.ir import u32

DEFAULT_SEED = 0x4D45_5745


class DomainError(Exception):
    """A failure of the input rather than of the environment (exit code 1)."""


# helpers


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load(path: str, check: bool = True) -> Module:
    module = parse_module(_read(path))
    if check:
        violations = validate(module)
        if violations:
            raise ValidationError(violations)
    return module


def _dump(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _emit(args, files: dict[str, str], primary: str) -> None:
    """Write ``files`` into --out (created if needed), else print ``primary``."""
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            (out / name).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(files[primary])


def _inputs(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(u32(int(v, 0)) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad input list {text!r}") from None


def _entry(module: Module, entry: str | None) -> str:
    if entry:
        return entry
    if not module.exports:
        raise DomainError("module has no exports; pass --entry")
    return module.exports[0][0]


def load_variant_sets(module: Module, module_text: str, directory: str) -> dict[str, VariantSet]:
    """Rebuild VariantSets from the per-function JSON files ``diversify`` wrote."""
    docs = []
    for path in sorted(Path(directory).glob("*.json")):
        doc = json.loads(path.read_text(encoding="utf-8"))
        if isinstance(doc, dict) and "function" in doc and "variants" in doc:
            docs.append(doc)
    snippets = [v["wat"] for d in docs for v in d["variants"]]
    if any(s is None for s in snippets):
        raise DomainError("variant files lack bodies")
    combined = parse_module(module_text, extra=snippets)
    sets = {}
    for d in docs:
        if not module.has_function(d["function"]):
            raise DomainError(f"variants for unknown function {d['function']!r}")
        sets[d["function"]] = VariantSet(
            module.function(d["function"]),
            [combined.function(v["name"]) for v in d["variants"]],
            candidates=d.get("candidates", 0), rejected=d.get("rejected", 0))
    return sets


# subcommands


def cmd_parse(args) -> int:
    module = _load(args.module, check=False)
    if args.format == "json":
        doc = {
            "functions": [{"name": f.name, "type": str(f.type), "locals": f.locals,
                           "instructions": len(f.body), "origin": f.origin.kind}
                          for f in module.functions],
            "exports": {e: module.functions[i].name for e, i in module.exports},
            "imports": [[i.module, i.field, i.name] for i in module.imports],
            "memory": module.memory,
        }
        _emit(args, {"module.json": _dump(doc)}, "module.json")
    else:
        _emit(args, {"module.wat": print_module(module) + "\n"}, "module.wat")
    return 0


def cmd_validate(args) -> int:
    module = _load(args.module, check=False)
    violations = validate(module)
    if args.format == "json":
        text = _dump({"valid": not violations,
                      "violations": [{"function": v.function, "offset": v.offset, "rule": v.rule}
                                     for v in violations]})
    else:
        text = "".join(f"{v}\n" for v in violations) or "ok\n"
    _emit(args, {"validation.txt": text}, "validation.txt")
    return 1 if violations else 0


def cmd_graph(args) -> int:
    module = _load(args.module)
    graph = build_call_graph(module, _entry(module, args.entry))
    if args.format == "json":
        _emit(args, {"paths.json": _dump(path_report(graph, args.path_budget))}, "paths.json")
    else:
        _emit(args, {"mcg.dot": export_dot(graph)}, "mcg.dot")
    return 0


def cmd_diversify(args) -> int:
    module = _load(args.module)
    try:
        rules = resolve_rules(r.strip() for r in args.rules.split(",") if r.strip())
    except KeyError as exc:
        raise DomainError(exc.args[0]) from None
    limits = Limits(args.max_variants, args.depth, args.budget)
    only = [f.strip() for f in args.functions.split(",") if f.strip()] or None
    sets = diversify_module(module, rules, limits, seed=args.seed,
                            oracle=OracleConfig(random_samples=args.samples, seed=args.seed),
                            only=only)
    summary = {"seed": args.seed, "functions": [
        {"function": name, "variants": len(vs.variants), "candidates": vs.candidates,
         "rejected": vs.rejected} for name, vs in sets.items()]}
    files = {f"{name}.json": vs.to_json() + "\n" for name, vs in sets.items()}
    if args.out:
        _emit(args, {**files, "summary.json": _dump(summary)}, "summary.json")
        width = max([len(n) for n in sets] + [8])
        print(f"{'function':<{width}}  variants  rejected")
        for row in summary["functions"]:
            print(f"{row['function']:<{width}}  {row['variants']:>8}  {row['rejected']:>8}")
    else:
        sys.stdout.write(_dump({"summary": summary,
                                "sets": [vs.to_dict() for vs in sets.values()]}))
    return 0


def cmd_link(args) -> int:
    text = _read(args.module)
    module = _load(args.module)
    sets = load_variant_sets(module, text, args.variants)
    linked = link_multivariant(module, sets)
    entry = _entry(module, args.entry)
    before = build_call_graph(module, entry)
    after = build_call_graph(linked, entry)
    row = path_report(after, args.path_budget)
    report = {
        "entry": entry,
        "budget": args.path_budget,
        "functions": len(module.functions),
        "non_diversified": sum(1 for f in module.functions
                               if f.name not in sets or not sets[f.name].variants),
        "dispatchers": row["dispatchers"],
        "variants": row["variants"],
        "paths_before": str(count_paths(before, args.path_budget).value),
        "paths_after": row["paths"],
    }
    _emit(args, {"multivariant.wat": print_module(linked) + "\n", "mcg.dot": export_dot(after),
                 "paths.json": _dump(report)}, "paths.json")
    return 0


def cmd_fleet(args) -> int:
    module = _load(args.module)
    cfg = FleetConfig(args.nodes, args.queries, args.seed, _entry(module, args.endpoint),
                      args.input, workers=args.workers)
    corpus = simulate(module, cfg)
    metrics = fleet_metrics(corpus)
    _emit(args, {"corpus.csv": corpus.to_csv(), "metrics.json": _dump(metrics)},
          "corpus.csv" if args.format == "csv" else "metrics.json")
    if corpus.failures == len(corpus.records):
        print("every query trapped", file=sys.stderr)
        return 1
    return 0


def cmd_preserve(args) -> int:
    text = _read(args.module)
    module = _load(args.module)
    try:
        passes = PassSet.parse(args.passes)
    except ValueError as exc:
        raise DomainError(str(exc)) from None
    sets = load_variant_sets(module, text, args.variants)
    linked = link_multivariant(module, sets)
    graph = build_call_graph(linked, _entry(module, args.entry))
    report = preservation_report(sets, passes, graph, args.path_budget)
    _emit(args, {"preservation.json": report.to_json() + "\n"}, "preservation.json")
    return 0


def cmd_timing(args) -> int:
    original = _load(args.original)
    multi = _load(args.multivariant)
    endpoint = _entry(original, args.endpoint)
    orig, mv = timing_distributions(original, multi, args.runs, args.seed, endpoint, args.input)
    _emit(args, {"timing.json": _dump(timing_report(orig, mv))}, "timing.json")
    return 0


# argument parsing


def _common(p: argparse.ArgumentParser, formats=None, default_format=None) -> None:
    p.add_argument("-o", "--out", help="output directory (created if absent); default: stdout")
    if formats:
        p.add_argument("--format", choices=formats, default=default_format)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multivariant",
                                     description="Multivariant diversification toolchain.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="key=value file supplying option defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse and pretty-print a module")
    p.add_argument("module")
    _common(p, ["wat", "json"], "wat")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("validate", help="type-check a module")
    p.add_argument("module")
    _common(p, ["text", "json"], "text")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("graph", help="call graph as DOT or path-count JSON")
    p.add_argument("module")
    p.add_argument("--entry")
    p.add_argument("--path-budget", type=int, default=1, help="back-edge budget B")
    _common(p, ["dot", "json"], "dot")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("diversify", help="enumerate certified variants per function")
    p.add_argument("module")
    p.add_argument("--rules", default=",".join(RULE_ORDER))
    p.add_argument("--max-variants", type=int, default=Limits.max_variants)
    p.add_argument("--depth", type=int, default=Limits.max_depth)
    p.add_argument("--budget", type=float, default=Limits.time_budget, help="seconds per function")
    p.add_argument("--samples", type=int, default=OracleConfig.random_samples)
    p.add_argument("--functions", default="", help="comma-separated subset")
    p.add_argument("--seed", type=lambda v: int(v, 0), default=DEFAULT_SEED)
    _common(p)
    p.set_defaults(func=cmd_diversify)

    p = sub.add_parser("link", help="build the multivariant module")
    p.add_argument("module")
    p.add_argument("variants", help="directory written by 'diversify'")
    p.add_argument("--entry")
    p.add_argument("--path-budget", type=int, default=1)
    p.add_argument("--seed", type=lambda v: int(v, 0), default=DEFAULT_SEED,
                   help="accepted for uniformity; linking draws no randomness")
    _common(p)
    p.set_defaults(func=cmd_link)

    p = sub.add_parser("fleet", help="simulate an edge fleet")
    p.add_argument("module")
    p.add_argument("--nodes", type=int, default=FleetConfig.nodes)
    p.add_argument("--queries", type=int, default=FleetConfig.queries)
    p.add_argument("--seed", type=lambda v: int(v, 0), default=DEFAULT_SEED)
    p.add_argument("--endpoint")
    p.add_argument("--input", type=_inputs, default=(), help="comma-separated i32 arguments")
    p.add_argument("--workers", type=int, default=1)
    _common(p, ["json", "csv"], "json")
    p.set_defaults(func=cmd_fleet)

    p = sub.add_parser("preserve", help="variant and path preservation under the optimizer")
    p.add_argument("module")
    p.add_argument("variants")
    p.add_argument("--passes", default="all", help="comma-separated pass ids, 'all' or 'none'")
    p.add_argument("--entry")
    p.add_argument("--path-budget", type=int, default=1)
    _common(p)
    p.set_defaults(func=cmd_preserve)

    p = sub.add_parser("timing", help="fuel distributions of original vs multivariant")
    p.add_argument("original")
    p.add_argument("multivariant")
    p.add_argument("--runs", type=int, default=1000)
    p.add_argument("--seed", type=lambda v: int(v, 0), default=DEFAULT_SEED)
    p.add_argument("--endpoint")
    p.add_argument("--input", type=_inputs, default=())
    _common(p)
    p.set_defaults(func=cmd_timing)
    return parser


def read_config(path: str) -> dict[str, str]:
    """``key = value`` lines; '#' starts a comment; dashes in keys become underscores."""
    conf = {}
    for n, line in enumerate(_read(path).splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        conf[key.replace("-", "_")] = value
    return conf


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    conf = read_config(known.config)
    sub_action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for sp in sub_action.choices.values():
        dests = {a.dest for a in sp._actions}
        sp.set_defaults(**{k: v for k, v in conf.items() if k in dests})


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, ValidationError, LinkError, DomainError, Trap, InstantiationError,
            KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
