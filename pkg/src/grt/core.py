"""Typed grammars, program ASTs, and the string-DSL evaluation semantics.

The component functions follow the SMT-LIB string theory with every partial
function totalized (out-of-range indexing yields "", failed numeric parses
yield -1) so evaluation is a total, deterministic function on any inputs.
Everything here is immutable after construction and safe to share.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Union


class Sort(enum.Enum):
    """Value sorts the DSL can produce."""

    STRING = "String"
    INT = "Int"
    BOOL = "Bool"


class UnknownTerminal(KeyError):
    """A terminal name that is not part of the grammar (or catalog) at hand."""

    def __str__(self) -> str:  # KeyError quotes its message by default
        return self.args[0] if self.args else ""


@dataclass(frozen=True)
class TerminalSymbol:
    """A named component function usable as an AST operator."""

    name: str
    arity: int
    arg_sorts: tuple[Sort, ...]
    ret_sort: Sort

    def __post_init__(self) -> None:
        if self.arity != len(self.arg_sorts):
            raise ValueError(
                f"terminal {self.name!r}: arity {self.arity} does not match "
                f"{len(self.arg_sorts)} argument sorts"
            )


# --- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Apply:
    terminal: TerminalSymbol
    children: "tuple[ProgramAst, ...]"

    @property
    def sort(self) -> Sort:
        return self.terminal.ret_sort


@dataclass(frozen=True)
class InputVar:
    name: str
    sort: Sort = Sort.STRING


@dataclass(frozen=True)
class StrLit:
    value: str

    @property
    def sort(self) -> Sort:
        return Sort.STRING


@dataclass(frozen=True)
class IntLit:
    value: int

    @property
    def sort(self) -> Sort:
        return Sort.INT


@dataclass(frozen=True)
class BoolLit:
    value: bool

    @property
    def sort(self) -> Sort:
        return Sort.BOOL


ProgramAst = Union[Apply, InputVar, StrLit, IntLit, BoolLit]


# --- Component function semantics (totalized SMT-LIB string theory) --------


def _str_concat(a: str, b: str) -> str:
    return a + b


def _str_replace(s: str, t: str, r: str) -> str:
    # replacing the first occurrence; an empty pattern matches at position 0
    if t == "":
        return r + s
    i = s.find(t)
    if i < 0:
        return s
    return s[:i] + r + s[i + len(t):]


def _str_at(s: str, i: int) -> str:
    return s[i] if 0 <= i < len(s) else ""


def _str_substr(s: str, i: int, n: int) -> str:
    if i < 0 or i >= len(s) or n <= 0:
        return ""
    return s[i : i + n]


def _str_len(s: str) -> int:
    return len(s)


def _str_indexof(s: str, t: str, i: int) -> int:
    if i < 0 or i > len(s):
        return -1
    return s.find(t, i)


def _str_to_int(s: str) -> int:
    if s and s.isascii() and s.isdigit():
        return int(s)
    return -1


def _int_to_str(n: int) -> str:
    return str(n) if n >= 0 else ""


def _str_prefixof(p: str, s: str) -> bool:
    return s.startswith(p)


def _str_suffixof(p: str, s: str) -> bool:
    return s.endswith(p)


def _str_contains(s: str, t: str) -> bool:
    return t in s


def _ite(c: bool, a: str, b: str) -> str:
    return a if c else b


def _int_add(a: int, b: int) -> int:
    return a + b


def _int_sub(a: int, b: int) -> int:
    return a - b


def _int_eq(a: int, b: int) -> bool:
    return a == b


_S, _I, _B = Sort.STRING, Sort.INT, Sort.BOOL

_CATALOG_SPEC: tuple[tuple[str, tuple[Sort, ...], Sort, Callable], ...] = (
    ("str.++", (_S, _S), _S, _str_concat),
    ("str.replace", (_S, _S, _S), _S, _str_replace),
    ("str.at", (_S, _I), _S, _str_at),
    ("str.substr", (_S, _I, _I), _S, _str_substr),
    ("str.len", (_S,), _I, _str_len),
    ("str.indexof", (_S, _S, _I), _I, _str_indexof),
    ("str.to.int", (_S,), _I, _str_to_int),
    ("int.to.str", (_I,), _S, _int_to_str),
    ("str.prefixof", (_S, _S), _B, _str_prefixof),
    ("str.suffixof", (_S, _S), _B, _str_suffixof),
    ("str.contains", (_S, _S), _B, _str_contains),
    ("ite", (_B, _S, _S), _S, _ite),
    ("+", (_I, _I), _I, _int_add),
    ("-", (_I, _I), _I, _int_sub),
    ("=", (_I, _I), _B, _int_eq),
)

CATALOG: dict[str, TerminalSymbol] = {
    name: TerminalSymbol(name, len(args), args, ret)
    for name, args, ret, _ in _CATALOG_SPEC
}

SEMANTICS: dict[str, Callable] = {name: fn for name, _, _, fn in _CATALOG_SPEC}

# Canonical terminal ordering: catalog order. Label vectors, vote vectors and
# the model output layer all index terminals in this order.
DEFAULT_TERMINAL_ORDER: tuple[str, ...] = tuple(CATALOG)

DEFAULT_STRING_LITERALS: tuple[str, ...] = ("", " ", "-", ".")
DEFAULT_INT_LITERALS: tuple[int, ...] = (0, 1, 2, 3)


# --- Grammar ----------------------------------------------------------------


@dataclass(frozen=True)
class Grammar:
    """A set of component functions plus the literal pools and input variables.

    ``terminals`` order is significant: it fixes the indexing of every label,
    vote, and prediction vector derived from this grammar. Arity-0 terminals
    are allowed as named variable occurrences (they must match an input
    variable) so tiny grammars can still expose a label slot for a variable.
    """

    terminals: tuple[TerminalSymbol, ...]
    start_sort: Sort = Sort.STRING
    string_literals: tuple[str, ...] = ()
    int_literals: tuple[int, ...] = ()
    input_vars: tuple[tuple[str, Sort], ...] = (("x0", Sort.STRING),)

    def __post_init__(self) -> None:
        names = [t.name for t in self.terminals]
        if len(names) != len(set(names)):
            raise ValueError("duplicate terminal names in grammar")
        var_sorts = dict(self.input_vars)
        for t in self.terminals:
            if t.arity == 0 and var_sorts.get(t.name) != t.ret_sort:
                raise ValueError(
                    f"arity-0 terminal {t.name!r} must name an input variable "
                    "of the same sort"
                )

    @property
    def terminal_names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.terminals)

    @property
    def var_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.input_vars)

    def terminal(self, name: str) -> TerminalSymbol:
        for t in self.terminals:
            if t.name == name:
                return t
        raise UnknownTerminal(f"terminal {name!r} not in grammar")

    def drop(self, name: str) -> "Grammar":
        """The same grammar without the named terminal."""
        if name not in self.terminal_names:
            raise UnknownTerminal(f"terminal {name!r} not in grammar")
        return Grammar(
            terminals=tuple(t for t in self.terminals if t.name != name),
            start_sort=self.start_sort,
            string_literals=self.string_literals,
            int_literals=self.int_literals,
            input_vars=self.input_vars,
        )


def drop_terminal(grammar: Grammar, name: str) -> Grammar:
    return grammar.drop(name)


def default_grammar(
    string_literals: Sequence[str] = DEFAULT_STRING_LITERALS,
    int_literals: Sequence[int] = DEFAULT_INT_LITERALS,
    input_vars: Sequence[tuple[str, Sort]] = (("x0", Sort.STRING),),
    terminals: Iterable[str] | None = None,
) -> Grammar:
    """The full string-manipulation grammar, optionally restricted by name."""
    if terminals is None:
        chosen = DEFAULT_TERMINAL_ORDER
    else:
        wanted = set(terminals)
        unknown = wanted - set(CATALOG)
        if unknown:
            raise UnknownTerminal(f"unknown terminals: {sorted(unknown)}")
        chosen = tuple(n for n in DEFAULT_TERMINAL_ORDER if n in wanted)
    return Grammar(
        terminals=tuple(CATALOG[n] for n in chosen),
        start_sort=Sort.STRING,
        string_literals=tuple(string_literals),
        int_literals=tuple(int_literals),
        input_vars=tuple(input_vars),
    )


# --- Constraints and problems ------------------------------------------------


@dataclass(frozen=True)
class IoConstraint:
    """One input-output example; inputs are positional per grammar variable."""

    inputs: tuple[str, ...]
    output: str


@dataclass(frozen=True)
class SygusProblem:
    grammar: Grammar
    constraints: tuple[IoConstraint, ...] = ()
    timeout_s: float = 3600.0

    def __post_init__(self) -> None:
        n_vars = len(self.grammar.input_vars)
        for c in self.constraints:
            if len(c.inputs) != n_vars:
                raise ValueError(
                    f"constraint has {len(c.inputs)} inputs, grammar declares "
                    f"{n_vars} variables"
                )


# --- Evaluation ---------------------------------------------------------------


def evaluate(program: ProgramAst, inputs: Sequence[str], var_names: Sequence[str] | None = None):
    """Run a program on concrete inputs; total for well-typed programs.

    ``var_names`` defaults to x0, x1, ... matching the inputs positionally.
    Raises TypeError when the input count does not fit the program's variables.
    """
    if var_names is None:
        var_names = tuple(f"x{i}" for i in range(len(inputs)))
    if len(var_names) != len(inputs):
        raise TypeError(
            f"{len(inputs)} inputs supplied for {len(var_names)} variables"
        )
    env = dict(zip(var_names, inputs))
    return _eval(program, env)


def _eval(node: ProgramAst, env: dict[str, object]):
    if isinstance(node, Apply):
        fn = SEMANTICS.get(node.terminal.name)
        if fn is None:
            raise UnknownTerminal(f"no semantics for terminal {node.terminal.name!r}")
        return fn(*(_eval(c, env) for c in node.children))
    if isinstance(node, InputVar):
        try:
            return env[node.name]
        except KeyError:
            raise TypeError(f"no input bound for variable {node.name!r}") from None
    return node.value


def satisfies(program: ProgramAst, constraint: IoConstraint, var_names: Sequence[str] | None = None) -> bool:
    """True iff the program maps the constraint's inputs to its exact output."""
    return evaluate(program, constraint.inputs, var_names) == constraint.output


def program_size(program: ProgramAst) -> int:
    """Node count of the AST: terminals, literals and variables, duplicates included."""
    n = 0
    stack = [program]
    while stack:
        node = stack.pop()
        n += 1
        if isinstance(node, Apply):
            stack.extend(node.children)
    return n


def terminals_used(program: ProgramAst) -> frozenset[str]:
    """Names of terminals (and named variable occurrences) in the program."""
    used = set()
    stack = [program]
    while stack:
        node = stack.pop()
        if isinstance(node, Apply):
            used.add(node.terminal.name)
            stack.extend(node.children)
        elif isinstance(node, InputVar):
            used.add(node.name)
    return frozenset(used)
