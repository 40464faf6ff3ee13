"""Reader for the WAT subset (flat instruction syntax, s-expression module)."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Union

from .ir import (BLOCK_OPS, I32, OPCODES, Function, FuncType, Import, Instr, Module,
                 Origin)


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Atom:
    text: str
    line: int
    col: int
    is_string: bool = False


@dataclass
class SList:
    items: list
    line: int
    col: int

    @property
    def head(self) -> str | None:
        if self.items and isinstance(self.items[0], Atom) and not self.items[0].is_string:
            return self.items[0].text
        return None


Node = Union[Atom, SList]

_ATOM_RE = re.compile(r"[^\s()\";]+")


def _tokenize(text: str) -> list:
    tokens: list = []
    i, line, col = 0, 1, 1
    n = len(text)

    def advance(k: int) -> None:
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line, col = line + 1, 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            advance(1)
        elif text.startswith(";;", i):
            while i < n and text[i] != "\n":
                advance(1)
        elif text.startswith("(;", i):
            start = (line, col)
            depth = 0
            while True:
                if i >= n:
                    raise ParseError("unterminated block comment", *start)
                if text.startswith("(;", i):
                    depth += 1
                    advance(2)
                elif text.startswith(";)", i):
                    depth -= 1
                    advance(2)
                    if depth == 0:
                        break
                else:
                    advance(1)
        elif ch in "()":
            tokens.append((ch, line, col))
            advance(1)
        elif ch == '"':
            start = (line, col)
            j = i + 1
            buf = []
            while True:
                if j >= n or text[j] == "\n":
                    raise ParseError("unterminated string", *start)
                if text[j] == "\\" and j + 1 < n:
                    buf.append(text[j + 1])
                    j += 2
                    continue
                if text[j] == '"':
                    break
                buf.append(text[j])
                j += 1
            tokens.append((Atom("".join(buf), *start, is_string=True), *start))
            advance(j + 1 - i)
        else:
            m = _ATOM_RE.match(text, i)
            if not m:
                raise ParseError(f"unexpected character {ch!r}", line, col)
            tokens.append((Atom(m.group(), line, col), line, col))
            advance(m.end() - i)
    return tokens


def _read_forms(text: str) -> list[Node]:
    stack: list[SList] = [SList([], 1, 1)]
    for tok, line, col in _tokenize(text):
        if tok == "(":
            stack.append(SList([], line, col))
        elif tok == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", line, col)
            done = stack.pop()
            stack[-1].items.append(done)
        else:
            stack[-1].items.append(tok)
    if len(stack) != 1:
        raise ParseError("missing ')'", stack[-1].line, stack[-1].col)
    return stack[0].items


def _parse_int(atom: Node, what: str) -> int:
    if not isinstance(atom, Atom) or atom.is_string:
        line, col = (atom.line, atom.col) if atom is not None else (0, 0)
        raise ParseError(f"expected {what}", line, col)
    try:
        value = int(atom.text.replace("_", ""), 0)
    except ValueError:
        raise ParseError(f"expected {what}, got {atom.text!r}", atom.line, atom.col) from None
    return value


def _valtype(node: Node) -> str:
    if not isinstance(node, Atom) or node.text != I32:
        text = node.text if isinstance(node, Atom) else "(...)"
        raise ParseError(f"unsupported value type {text!r} (only i32)", node.line, node.col)
    return I32


def _is_id(node: Node) -> bool:
    return isinstance(node, Atom) and not node.is_string and node.text.startswith("$")


@dataclass
class _FuncHeader:
    form: SList
    name: str | None
    type: FuncType
    param_names: dict[str, int]
    origin: Origin
    inline_exports: list[str]
    rest: list


class _Builder:
    def __init__(self) -> None:
        self.types: list[FuncType] = []
        self.type_names: dict[str, int] = {}
        self.imports: list[tuple[SList, str, str, str | None, FuncType]] = []
        self.funcs: list[_FuncHeader] = []
        self.exports: list[tuple[str, Atom | None, Node]] = []
        self.memory: int | None = None
        self.memory_form: SList | None = None

    # -- module fields -------------------------------------------------------
    def add_field(self, form: Node) -> None:
        if not isinstance(form, SList):
            raise ParseError(f"unexpected token {form.text!r}", form.line, form.col)
        head = form.head
        if head == "type":
            self._type(form)
        elif head == "import":
            self._import(form)
        elif head == "func":
            self.funcs.append(self._func_header(form))
        elif head == "export":
            self._export(form)
        elif head == "memory":
            self._memory(form)
        else:
            raise ParseError(f"unsupported module field {head!r}", form.line, form.col)

    def _type(self, form: SList) -> None:
        items = form.items[1:]
        if items and _is_id(items[0]):
            self.type_names[items[0].text] = len(self.types)
            items = items[1:]
        if len(items) != 1 or not isinstance(items[0], SList) or items[0].head != "func":
            raise ParseError("malformed type definition", form.line, form.col)
        ftype, _, rest = self._signature(items[0].items[1:], allow_names=False)
        if rest:
            raise ParseError("malformed type definition", form.line, form.col)
        self.types.append(ftype)

    def _signature(self, items: list, allow_names: bool) -> tuple[FuncType, dict[str, int], list]:
        params: list[str] = []
        names: dict[str, int] = {}
        result: str | None = None
        explicit_type: FuncType | None = None
        i = 0
        while i < len(items) and isinstance(items[i], SList) and items[i].head in ("type", "param", "result"):
            node = items[i]
            if node.head == "type":
                ref = node.items[1] if len(node.items) == 2 else None
                explicit_type = self._type_ref(ref, node)
            elif node.head == "param":
                rest = node.items[1:]
                if rest and _is_id(rest[0]):
                    if not allow_names:
                        raise ParseError("named parameter not allowed here", node.line, node.col)
                    if len(rest) != 2:
                        raise ParseError("named param takes one type", node.line, node.col)
                    names[rest[0].text] = len(params)
                    rest = rest[1:]
                params.extend(_valtype(t) for t in rest)
            else:
                rest = node.items[1:]
                if result is not None or len(rest) != 1:
                    raise ParseError("at most one i32 result supported", node.line, node.col)
                result = _valtype(rest[0])
            i += 1
        ftype = FuncType(tuple(params), result)
        if explicit_type is not None:
            if params or result:
                if ftype != explicit_type:
                    raise ParseError("inline signature disagrees with type use", items[0].line, items[0].col)
            ftype = explicit_type
        return ftype, names, items[i:]

    def _type_ref(self, ref: Node | None, node: SList) -> FuncType:
        if ref is None:
            raise ParseError("malformed type use", node.line, node.col)
        if _is_id(ref):
            if ref.text not in self.type_names:
                raise ParseError(f"unresolved name {ref.text}", ref.line, ref.col)
            return self.types[self.type_names[ref.text]]
        idx = _parse_int(ref, "type index")
        if not 0 <= idx < len(self.types):
            raise ParseError(f"unresolved index {idx}", ref.line, ref.col)
        return self.types[idx]

    def _import(self, form: SList) -> None:
        items = form.items
        if len(items) != 4 or not all(isinstance(a, Atom) and a.is_string for a in items[1:3]) \
                or not isinstance(items[3], SList) or items[3].head != "func":
            raise ParseError("malformed import (only function imports supported)", form.line, form.col)
        desc = items[3].items[1:]
        name = None
        if desc and _is_id(desc[0]):
            name = desc[0].text[1:]
            desc = desc[1:]
        ftype, _, rest = self._signature(desc, allow_names=False)
        if rest:
            raise ParseError("malformed import signature", form.line, form.col)
        self.imports.append((form, items[1].text, items[2].text, name, ftype))

    def _func_header(self, form: SList) -> _FuncHeader:
        items = form.items[1:]
        name = None
        if items and _is_id(items[0]):
            name = items[0].text[1:]
            items = items[1:]
        origin = Origin()
        inline_exports: list[str] = []
        while items and isinstance(items[0], SList) and items[0].head in ("@origin", "export"):
            node = items[0]
            if node.head == "export":
                if len(node.items) != 2 or not node.items[1].is_string:
                    raise ParseError("malformed inline export", node.line, node.col)
                inline_exports.append(node.items[1].text)
            else:
                origin = self._origin(node)
            items = items[1:]
        ftype, names, rest = self._signature(items, allow_names=True)
        return _FuncHeader(form, name, ftype, names, origin, inline_exports, rest)

    @staticmethod
    def _origin(node: SList) -> Origin:
        args = node.items[1:]
        if not args or not isinstance(args[0], Atom):
            raise ParseError("malformed @origin annotation", node.line, node.col)
        kind = args[0].text
        strings = [a.text for a in args[1:] if isinstance(a, Atom) and a.is_string]
        if len(strings) != len(args) - 1:
            raise ParseError("malformed @origin annotation", node.line, node.col)
        if kind == "original" and not strings:
            return Origin()
        if kind == "variant" and strings:
            return Origin.variant(strings[0], strings[1:])
        if kind == "dispatcher" and len(strings) == 1:
            return Origin.dispatcher(strings[0])
        raise ParseError(f"malformed @origin annotation {kind!r}", node.line, node.col)

    def _export(self, form: SList) -> None:
        items = form.items
        if len(items) != 3 or not (isinstance(items[1], Atom) and items[1].is_string) \
                or not isinstance(items[2], SList) or items[2].head != "func" or len(items[2].items) != 2:
            raise ParseError("malformed export (only function exports supported)", form.line, form.col)
        self.exports.append((items[1].text, items[1], items[2].items[1]))

    def _memory(self, form: SList) -> None:
        if self.memory_form is not None:
            raise ParseError("multiple memories", form.line, form.col)
        items = form.items[1:]
        if items and _is_id(items[0]):
            items = items[1:]
        if not items or len(items) > 2:
            raise ParseError("malformed memory", form.line, form.col)
        pages = _parse_int(items[0], "page count")
        if pages < 0:
            raise ParseError("negative page count", items[0].line, items[0].col)
        self.memory = pages
        self.memory_form = form

    # -- resolution ------------------------------------------------------------
    def build(self) -> Module:
        # combined function index space: imports first, then defined functions
        import_names = [imp[3] for imp in self.imports]
        func_names = [h.name for h in self.funcs]
        n_imp = len(import_names)

        resolved_exports: list[tuple[str, Atom, int]] = []
        for ename, atom, ref in self.exports:
            idx = self._combined_index(ref, import_names, func_names)
            if idx < n_imp:
                raise ParseError("exporting an import is not supported", ref.line, ref.col)
            resolved_exports.append((ename, atom, idx - n_imp))
        for fi, h in enumerate(self.funcs):
            for ename in h.inline_exports:
                resolved_exports.append((ename, Atom(ename, h.form.line, h.form.col), fi))

        seen: set[str] = set()
        for ename, atom, _ in resolved_exports:
            if ename in seen:
                raise ParseError(f"duplicate export name {ename!r}", atom.line, atom.col)
            seen.add(ename)

        # unnamed functions take their first export name, else a positional name
        names: list[str] = []
        for fi, h in enumerate(self.funcs):
            if h.name is None:
                exported = [e for e, _, i in resolved_exports if i == fi]
                h.name = exported[0] if exported else f"func{fi}"
            names.append(h.name)
        imp_final = []
        for ii, (form, mod, fld, name, ftype) in enumerate(self.imports):
            imp_final.append(Import(mod, fld, name if name is not None else f"import{ii}", ftype))
        all_names = [imp.name for imp in imp_final] + names
        dup = {n for n in all_names if all_names.count(n) > 1}
        if dup:
            raise ParseError(f"duplicate function name ${sorted(dup)[0]}", 0, 0)

        functions = []
        for h in self.funcs:
            locals_count, body = self._body(h, all_names, n_imp)
            functions.append(Function(h.name, h.type, locals_count, tuple(body), h.origin))
        exports = tuple((e, i) for e, _, i in resolved_exports)
        return Module(tuple(functions), exports, tuple(imp_final), self.memory)

    def _combined_index(self, ref: Node, import_names: list, func_names: list) -> int:
        if _is_id(ref):
            target = ref.text[1:]
            for i, nm in enumerate(import_names):
                if nm == target:
                    return i
            for i, nm in enumerate(func_names):
                if nm == target:
                    return len(import_names) + i
            raise ParseError(f"unresolved name {ref.text}", ref.line, ref.col)
        idx = _parse_int(ref, "function index")
        if not 0 <= idx < len(import_names) + len(func_names):
            raise ParseError(f"unresolved index {idx}", ref.line, ref.col)
        return idx

    def _body(self, h: _FuncHeader, all_names: list[str], n_imp: int) -> tuple[int, list[Instr]]:
        local_names = dict(h.param_names)
        nparams = h.type.arity
        nlocals = 0
        items = h.rest
        while items and isinstance(items[0], SList) and items[0].head == "local":
            node = items[0]
            rest = node.items[1:]
            if rest and _is_id(rest[0]):
                if len(rest) != 2:
                    raise ParseError("named local takes one type", node.line, node.col)
                local_names[rest[0].text] = nparams + nlocals
                rest = rest[1:]
            for t in rest:
                _valtype(t)
                nlocals += 1
            items = items[1:]

        body: list[Instr] = []
        labels: list[str | None] = []
        i = 0

        def take() -> Node | None:
            nonlocal i
            if i < len(items):
                node = items[i]
                i += 1
                return node
            return None

        def peek() -> Node | None:
            return items[i] if i < len(items) else None

        while i < len(items):
            tok = take()
            if isinstance(tok, SList):
                if tok.head in ("local", "param", "result", "type"):
                    raise ParseError(f"misplaced ({tok.head} ...)", tok.line, tok.col)
                raise ParseError("folded instructions are not supported", tok.line, tok.col)
            if tok.is_string:
                raise ParseError(f"unexpected string {tok.text!r}", tok.line, tok.col)
            op = tok.text
            if op not in OPCODES:
                raise ParseError(f"unknown opcode {op!r}", tok.line, tok.col)
            if op in BLOCK_OPS:
                label = None
                if _is_id(peek()):
                    label = take().text
                blocktype = None
                nxt = peek()
                if isinstance(nxt, SList) and nxt.head == "result":
                    take()
                    if len(nxt.items) != 2:
                        raise ParseError("block result takes one type", nxt.line, nxt.col)
                    blocktype = _valtype(nxt.items[1])
                labels.append(label)
                body.append(Instr(op, blocktype))
            elif op in ("else", "end"):
                if _is_id(peek()):
                    take()
                if op == "end":
                    if not labels:
                        raise ParseError("unbalanced 'end'", tok.line, tok.col)
                    labels.pop()
                elif not labels:
                    raise ParseError("'else' outside of if", tok.line, tok.col)
                body.append(Instr(op))
            elif op in ("br", "br_if"):
                ref = take()
                if ref is None or isinstance(ref, SList):
                    raise ParseError(f"arity mismatch: {op} expects a label", tok.line, tok.col)
                if _is_id(ref):
                    try:
                        depth = labels[::-1].index(ref.text)
                    except ValueError:
                        raise ParseError(f"unresolved name {ref.text}", ref.line, ref.col) from None
                else:
                    depth = _parse_int(ref, "branch depth")
                body.append(Instr(op, depth))
            elif op == "call":
                ref = take()
                if ref is None or isinstance(ref, SList):
                    raise ParseError("arity mismatch: call expects a function", tok.line, tok.col)
                idx = self._combined_index(ref, all_names[:n_imp], all_names[n_imp:])
                body.append(Instr("call", all_names[idx]))
            elif op in ("local.get", "local.set", "local.tee"):
                ref = take()
                if ref is None or isinstance(ref, SList):
                    raise ParseError(f"arity mismatch: {op} expects a local", tok.line, tok.col)
                if _is_id(ref):
                    if ref.text not in local_names:
                        raise ParseError(f"unresolved name {ref.text}", ref.line, ref.col)
                    idx = local_names[ref.text]
                else:
                    idx = _parse_int(ref, "local index")
                    if not 0 <= idx < nparams + nlocals:
                        raise ParseError(f"unresolved index {idx}", ref.line, ref.col)
                body.append(Instr(op, idx))
            elif op == "i32.const":
                ref = take()
                if ref is None or isinstance(ref, SList):
                    raise ParseError("arity mismatch: i32.const expects an integer", tok.line, tok.col)
                value = _parse_int(ref, "integer")
                if not -(1 << 31) <= value < (1 << 32):
                    raise ParseError(f"constant {value} out of i32 range", ref.line, ref.col)
                body.append(Instr(op, value))
            elif op in ("i32.load", "i32.store"):
                offset = 0
                while isinstance(peek(), Atom) and not peek().is_string and \
                        (peek().text.startswith("offset=") or peek().text.startswith("align=")):
                    imm = take()
                    key, _, val = imm.text.partition("=")
                    try:
                        num = int(val, 0)
                    except ValueError:
                        raise ParseError(f"bad {key} immediate", imm.line, imm.col) from None
                    if key == "offset":
                        offset = num
                body.append(Instr(op, offset))
            else:
                body.append(Instr(op))
        if labels:
            raise ParseError("missing 'end'", h.form.line, h.form.col)
        return nlocals, body


def parse_module(text: str, extra: Iterable[str] = ()) -> Module:
    """Parse module text; ``extra`` holds additional top-level field snippets
    (e.g. ``(func ...)`` forms) spliced into the module before resolution."""
    forms = _read_forms(text)
    if len(forms) != 1 or not isinstance(forms[0], SList) or forms[0].head != "module":
        line, col = (forms[0].line, forms[0].col) if forms else (1, 1)
        raise ParseError("expected a single (module ...) form", line, col)
    fields = forms[0].items[1:]
    if fields and _is_id(fields[0]):
        fields = fields[1:]
    for snippet in extra:
        fields = fields + _read_forms(snippet)
    builder = _Builder()
    for f in fields:
        builder.add_field(f)
    return builder.build()
