"""Assemble originals, variants and dispatchers into one multivariant module."""

from __future__ import annotations

import re

from ..wat.ir import I32, RNG_FIELD, RNG_MODULE, FuncType, Function, Import, Instr, Module
from ..wat.validate import check
from .dispatcher import DispatcherSpec, dispatcher_name, synthesize_dispatcher

_RESERVED = re.compile(r"(__v\d+|__dispatch)$")


class LinkError(ValueError):
    pass


def _rng_import(module: Module) -> tuple[str, tuple[Import, ...]]:
    for imp in module.imports:
        if imp.is_rng:
            return imp.name, module.imports
    taken = {f.name for f in module.functions} | {i.name for i in module.imports}
    name = RNG_FIELD
    while name in taken:
        name = "_" + name
    return name, module.imports + (Import(RNG_MODULE, RNG_FIELD, name, FuncType((), I32)),)


def _redirect(func: Function, targets: dict[str, str]) -> Function:
    if not any(c in targets for c in func.calls()):
        return func
    body = tuple(Instr("call", targets[i.arg]) if i.op == "call" and i.arg in targets else i
                 for i in func.body)
    return func.with_body(body)


def link_multivariant(module: Module, sets) -> Module:
    """Link variant sets into ``module``.

    Every call to a diversified function, anywhere outside its dispatcher, is
    redirected to the dispatcher, and so are exports of it. Originals keep
    their indices; variants and dispatchers are appended.
    """
    diversified = [f.name for f in module.functions if f.name in sets and len(sets[f.name].variants)]
    missing = [name for name in sets if not module.has_function(name)]
    if missing:
        raise LinkError(f"variant sets for unknown functions: {', '.join(missing)}")
    if not diversified:
        return module
    for f in module.functions:
        if _RESERVED.search(f.name):
            raise LinkError(f"function name {f.name!r} uses a reserved suffix")

    rng_name, imports = _rng_import(module)
    targets = {name: dispatcher_name(name) for name in diversified}
    functions = [_redirect(f, targets) for f in module.functions]
    taken = {f.name for f in functions} | {i.name for i in imports}

    for name in diversified:
        original = module.function(name)
        vs = sets[name]
        choices = []
        for v in vs.variants:
            if v.name in taken:
                raise LinkError(f"variant name {v.name!r} collides with an existing function")
            if v.type != original.type:
                raise LinkError(f"variant {v.name} changes the signature of {name}")
            taken.add(v.name)
            functions.append(_redirect(v, targets))
            choices.append(v.name)
        choices.append(name)
        spec = DispatcherSpec(name, tuple(choices), rng_name, original.type)
        functions.append(synthesize_dispatcher(spec))

    index = {f.name: i for i, f in enumerate(functions)}
    exports = []
    for ename, idx in module.exports:
        fname = module.functions[idx].name
        exports.append((ename, index[targets.get(fname, fname)]))
    return check(Module(tuple(functions), tuple(exports), imports, module.memory))
