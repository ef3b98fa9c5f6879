"""Learned grammar pruning for syntax-guided string synthesis.

The pipeline: stream programs from the grammar to fabricate labeled examples,
train a multi-label criticality model, measure per-terminal time savings,
combine both into a reduced grammar per problem, and schedule a fallback to
the full grammar.
"""

from .core import (
    Apply,
    BoolLit,
    Grammar,
    InputVar,
    IntLit,
    IoConstraint,
    Sort,
    StrLit,
    SygusProblem,
    TerminalSymbol,
    UnknownTerminal,
    default_grammar,
    drop_terminal,
    evaluate,
    program_size,
    satisfies,
)
from .enumerator import GrammarExhausted, SynthesisResult, solve, solve_with_external, stream
from .sygus_format import ParseError, ProblemFile, parse_problem, parse_problem_file, print_problem, print_solution

__all__ = [
    "Apply",
    "BoolLit",
    "Grammar",
    "GrammarExhausted",
    "InputVar",
    "IntLit",
    "IoConstraint",
    "ParseError",
    "ProblemFile",
    "Sort",
    "StrLit",
    "SygusProblem",
    "SynthesisResult",
    "TerminalSymbol",
    "UnknownTerminal",
    "default_grammar",
    "drop_terminal",
    "evaluate",
    "parse_problem",
    "parse_problem_file",
    "print_problem",
    "print_solution",
    "program_size",
    "satisfies",
    "solve",
    "solve_with_external",
    "stream",
]
