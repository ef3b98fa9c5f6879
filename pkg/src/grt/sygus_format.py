"""Parser and printer for a strict SyGuS-lite s-expression problem format.

Supported surface: ``set-logic SLIA``, one ``synth-fun`` with an explicit
grammar, ``declare-var``, ground PBE ``constraint`` forms, ``check-synth``.
Anything else is rejected loudly. String literals use SMT-LIB double-quote
escaping ("" inside a literal denotes one quote character).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .core import (
    Apply,
    BoolLit,
    CATALOG,
    DEFAULT_TERMINAL_ORDER,
    Grammar,
    InputVar,
    IntLit,
    IoConstraint,
    ProgramAst,
    Sort,
    StrLit,
    SygusProblem,
    UnknownTerminal,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{message} (line {line}, column {col})" if line else message)
        self.line = line
        self.col = col


class Symbol(str):
    """A bare s-expression symbol, distinct from a string literal."""

    __slots__ = ()


_INT_RE = re.compile(r"-?\d+")
_SORT_NAMES = {"String": Sort.STRING, "Int": Sort.INT, "Bool": Sort.BOOL}


@dataclass(frozen=True)
class ProblemFile:
    path: str | None
    problem: SygusProblem
    fn_name: str


@dataclass(frozen=True)
class ParsedSolution:
    fn_name: str
    params: tuple[tuple[str, Sort], ...]
    ret_sort: Sort
    program: ProgramAst


# --- Tokenizer / reader -------------------------------------------------------


def _tokenize(text: str):
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
        elif ch in " \t\r":
            i += 1
            col += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            tokens.append((ch, ch, line, col))
            i += 1
            col += 1
        elif ch == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            parts = []
            while True:
                if i >= n:
                    raise ParseError("unterminated string literal", start_line, start_col)
                c = text[i]
                if c == '"':
                    if i + 1 < n and text[i + 1] == '"':
                        parts.append('"')
                        i += 2
                        col += 2
                        continue
                    i += 1
                    col += 1
                    break
                if c == "\n":
                    line += 1
                    col = 1
                else:
                    col += 1
                parts.append(c)
                i += 1
            tokens.append(("str", "".join(parts), start_line, start_col))
        else:
            start = i
            start_col = col
            while i < n and text[i] not in ' \t\r\n();"':
                i += 1
                col += 1
            word = text[start:i]
            if _INT_RE.fullmatch(word):
                tokens.append(("int", int(word), line, start_col))
            else:
                tokens.append(("sym", word, line, start_col))
    return tokens


def _read_all(text: str) -> list:
    """Read every top-level s-expression in the text."""
    tokens = _tokenize(text)
    forms = []
    pos = 0
    while pos < len(tokens):
        form, pos = _read_one(tokens, pos)
        forms.append(form)
    return forms


def _read_one(tokens, pos):
    if pos >= len(tokens):
        raise ParseError("unexpected end of input")
    kind, value, line, col = tokens[pos]
    if kind == "(":
        items = []
        pos += 1
        while True:
            if pos >= len(tokens):
                raise ParseError("unbalanced parenthesis", line, col)
            if tokens[pos][0] == ")":
                return items, pos + 1
            item, pos = _read_one(tokens, pos)
            items.append(item)
    if kind == ")":
        raise ParseError("unexpected ')'", line, col)
    if kind == "sym":
        return Symbol(value), pos + 1
    return value, pos + 1  # "str" -> str, "int" -> int


def _sort_of(sym, where: str) -> Sort:
    if isinstance(sym, Symbol) and str(sym) in _SORT_NAMES:
        return _SORT_NAMES[str(sym)]
    raise ParseError(f"expected a sort in {where}, got {sym!r}")


# --- Problem parsing -----------------------------------------------------------


def parse_problem_file(text: str, path: str | None = None) -> ProblemFile:
    forms = _read_all(text)
    fn_name = None
    params: list[tuple[str, Sort]] = []
    ops: list[str] = []
    str_lits: list[str] = []
    int_lits: list[int] = []
    constraints: list[IoConstraint] = []
    saw_logic = False
    saw_check = False

    for form in forms:
        if not isinstance(form, list) or not form or not isinstance(form[0], Symbol):
            raise ParseError(f"unsupported top-level form: {form!r}")
        head = str(form[0])
        if head == "set-logic":
            if len(form) != 2 or str(form[1]) != "SLIA":
                raise ParseError("only (set-logic SLIA) is supported")
            saw_logic = True
        elif head == "synth-fun":
            if fn_name is not None:
                raise ParseError("multiple synth-fun declarations")
            fn_name, params, ops, str_lits, int_lits = _parse_synth_fun(form)
        elif head == "declare-var":
            if len(form) != 3 or not isinstance(form[1], Symbol):
                raise ParseError(f"malformed declare-var: {form!r}")
            _sort_of(form[2], "declare-var")
        elif head == "constraint":
            if fn_name is None:
                raise ParseError("constraint before synth-fun")
            constraints.append(_parse_constraint(form, fn_name, len(params)))
        elif head == "check-synth":
            saw_check = True
        else:
            raise ParseError(f"unsupported form ({head} ...)")

    if not saw_logic:
        raise ParseError("missing (set-logic SLIA)")
    if fn_name is None:
        raise ParseError("missing synth-fun declaration")
    if not saw_check:
        raise ParseError("missing (check-synth)")

    grammar = Grammar(
        terminals=tuple(CATALOG[n] for n in DEFAULT_TERMINAL_ORDER if n in set(ops)),
        start_sort=Sort.STRING,
        string_literals=tuple(dict.fromkeys(str_lits)),
        int_literals=tuple(dict.fromkeys(int_lits)),
        input_vars=tuple(params),
    )
    problem = SygusProblem(grammar=grammar, constraints=tuple(constraints))
    return ProblemFile(path=path, problem=problem, fn_name=fn_name)


def parse_problem(text: str) -> SygusProblem:
    return parse_problem_file(text).problem


def _parse_synth_fun(form):
    if len(form) != 5:
        raise ParseError("synth-fun must be (synth-fun name (params) String (grammar))")
    _, name_sym, params_form, ret_form, grammar_form = form
    if not isinstance(name_sym, Symbol):
        raise ParseError("synth-fun name must be a symbol")
    if not isinstance(params_form, list):
        raise ParseError("synth-fun parameter list must be a list")
    params = []
    for p in params_form:
        if not (isinstance(p, list) and len(p) == 2 and isinstance(p[0], Symbol)):
            raise ParseError(f"malformed parameter: {p!r}")
        sort = _sort_of(p[1], "synth-fun parameters")
        if sort is not Sort.STRING:
            raise ParseError("only String-sorted parameters are supported")
        params.append((str(p[0]), sort))
    if _sort_of(ret_form, "synth-fun return sort") is not Sort.STRING:
        raise ParseError("only String-valued synthesis functions are supported")
    if not isinstance(grammar_form, list) or not grammar_form:
        raise ParseError("synth-fun requires an explicit grammar")

    nt_names = set()
    for decl in grammar_form:
        if not (isinstance(decl, list) and len(decl) == 3 and isinstance(decl[0], Symbol)):
            raise ParseError(f"malformed nonterminal declaration: {decl!r}")
        nt_names.add(str(decl[0]))

    param_names = {n for n, _ in params}
    ops: list[str] = []
    str_lits: list[str] = []
    int_lits: list[int] = []

    def walk(entry):
        if isinstance(entry, Symbol):
            s = str(entry)
            if s in param_names or s in nt_names or s in ("true", "false"):
                return
            raise UnknownTerminal(f"unsupported grammar entry {s!r}")
        if isinstance(entry, str):
            str_lits.append(entry)
            return
        if isinstance(entry, int):
            int_lits.append(entry)
            return
        if isinstance(entry, list) and entry and isinstance(entry[0], Symbol):
            op = str(entry[0])
            term = CATALOG.get(op)
            if term is None:
                raise UnknownTerminal(f"unsupported grammar operator {op!r}")
            if len(entry) - 1 != term.arity:
                raise ParseError(
                    f"operator {op!r} takes {term.arity} arguments, got {len(entry) - 1}"
                )
            ops.append(op)
            for child in entry[1:]:
                walk(child)
            return
        raise ParseError(f"malformed grammar entry: {entry!r}")

    for decl in grammar_form:
        _sort_of(decl[1], "nonterminal declaration")
        if not isinstance(decl[2], list):
            raise ParseError("nonterminal productions must be a list")
        for entry in decl[2]:
            walk(entry)

    return str(name_sym), params, ops, str_lits, int_lits


def _parse_constraint(form, fn_name: str, n_params: int) -> IoConstraint:
    bad = ParseError(f"constraints must look like (constraint (= ({fn_name} \"in\"...) \"out\"))")
    if len(form) != 2 or not isinstance(form[1], list):
        raise bad
    eq = form[1]
    if len(eq) != 3 or str(eq[0]) != "=" or not isinstance(eq[0], Symbol):
        raise bad
    call, out = eq[1], eq[2]
    if not (isinstance(call, list) and call and isinstance(call[0], Symbol) and str(call[0]) == fn_name):
        raise bad
    args = call[1:]
    if len(args) != n_params:
        raise ParseError(
            f"constraint applies {fn_name} to {len(args)} arguments, expected {n_params}"
        )
    for a in args:
        if isinstance(a, Symbol) or not isinstance(a, str):
            raise ParseError("constraint arguments must be string literals")
    if isinstance(out, Symbol) or not isinstance(out, str):
        raise ParseError("constraint output must be a string literal")
    return IoConstraint(inputs=tuple(args), output=out)


# --- Printing -------------------------------------------------------------------


_NT_NAME = {Sort.STRING: "Start", Sort.INT: "StartInt", Sort.BOOL: "StartBool"}


def _quote(s: str) -> str:
    return '"' + s.replace('"', '""') + '"'


def print_problem(pf: ProblemFile) -> str:
    """Emit the normalized problem text; a fixpoint of parse-then-print."""
    g = pf.problem.grammar
    used_sorts = {Sort.STRING}
    for t in g.terminals:
        used_sorts.add(t.ret_sort)
        used_sorts.update(t.arg_sorts)
    if g.int_literals:
        used_sorts.add(Sort.INT)

    productions: dict[Sort, list[str]] = {s: [] for s in (Sort.STRING, Sort.INT, Sort.BOOL)}
    for name, sort in g.input_vars:
        productions[sort].append(name)
    for s in g.string_literals:
        productions[Sort.STRING].append(_quote(s))
    for n in g.int_literals:
        productions[Sort.INT].append(str(n))
    for t in g.terminals:
        if t.arity == 0:
            continue  # variable occurrence, already listed
        args = " ".join(_NT_NAME[a] for a in t.arg_sorts)
        productions[t.ret_sort].append(f"({t.name} {args})")

    nt_lines = []
    for sort in (Sort.STRING, Sort.INT, Sort.BOOL):
        if sort in used_sorts and (productions[sort] or sort is Sort.STRING):
            entries = " ".join(productions[sort])
            nt_lines.append(f"({_NT_NAME[sort]} {sort.value} ({entries}))")

    params = " ".join(f"({name} {sort.value})" for name, sort in g.input_vars)
    lines = ["(set-logic SLIA)"]
    lines.append(f"(synth-fun {pf.fn_name} ({params}) String")
    for i, nt in enumerate(nt_lines):
        prefix = "    (" if i == 0 else "     "
        suffix = "))" if i == len(nt_lines) - 1 else ""
        lines.append(f"{prefix}{nt}{suffix}")
    for name, sort in g.input_vars:
        lines.append(f"(declare-var {name} {sort.value})")
    for c in pf.problem.constraints:
        args = " ".join(_quote(s) for s in c.inputs)
        call = f"({pf.fn_name} {args})" if args else f"({pf.fn_name})"
        lines.append(f"(constraint (= {call} {_quote(c.output)}))")
    lines.append("(check-synth)")
    return "\n".join(lines) + "\n"


def program_to_text(program: ProgramAst) -> str:
    """Render a program body as an s-expression."""
    if isinstance(program, Apply):
        inner = " ".join(program_to_text(c) for c in program.children)
        return f"({program.terminal.name} {inner})"
    if isinstance(program, InputVar):
        return program.name
    if isinstance(program, StrLit):
        return _quote(program.value)
    if isinstance(program, IntLit):
        return str(program.value)
    return "true" if program.value else "false"


def print_solution(program: ProgramAst, fn_name: str, params: Sequence[tuple[str, Sort]]) -> str:
    plist = " ".join(f"({name} {sort.value})" for name, sort in params)
    return f"(define-fun {fn_name} ({plist}) String {program_to_text(program)})"


# --- Solution parsing ------------------------------------------------------------


def parse_solution(text: str) -> ParsedSolution:
    """Parse the first (define-fun ...) in the text into a typed program."""
    start = text.find("(define-fun")
    if start < 0:
        raise ParseError("no define-fun found in solver output")
    tokens = _tokenize(text[start:])
    form, _ = _read_one(tokens, 0)
    if len(form) != 5 or str(form[0]) != "define-fun":
        raise ParseError("malformed define-fun")
    _, name_sym, params_form, ret_form, body = form
    params = []
    for p in params_form:
        if not (isinstance(p, list) and len(p) == 2 and isinstance(p[0], Symbol)):
            raise ParseError(f"malformed parameter: {p!r}")
        params.append((str(p[0]), _sort_of(p[1], "define-fun parameters")))
    ret_sort = _sort_of(ret_form, "define-fun return sort")
    program = _typed_body(body, dict(params))
    if program.sort is not ret_sort:
        raise ParseError(
            f"define-fun body has sort {program.sort.value}, declared {ret_sort.value}"
        )
    return ParsedSolution(str(name_sym), tuple(params), ret_sort, program)


def _typed_body(entry, param_sorts: dict[str, Sort]) -> ProgramAst:
    if isinstance(entry, Symbol):
        s = str(entry)
        if s in param_sorts:
            return InputVar(s, param_sorts[s])
        if s in ("true", "false"):
            return BoolLit(s == "true")
        raise ParseError(f"unknown symbol {s!r} in program body")
    if isinstance(entry, str):
        return StrLit(entry)
    if isinstance(entry, int):
        return IntLit(entry)
    if isinstance(entry, list) and entry and isinstance(entry[0], Symbol):
        op = str(entry[0])
        term = CATALOG.get(op)
        if term is None:
            raise UnknownTerminal(f"unsupported operator {op!r} in program body")
        children = tuple(_typed_body(c, param_sorts) for c in entry[1:])
        if len(children) != term.arity or any(
            c.sort is not s for c, s in zip(children, term.arg_sorts)
        ):
            raise ParseError(f"ill-typed application of {op!r}")
        return Apply(term, children)
    raise ParseError(f"malformed program body entry: {entry!r}")
