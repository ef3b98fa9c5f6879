#!/usr/bin/env python3
"""Regenerate the checked-in benchmark suites.

benchmarks/handwritten: ten curated string tasks used for timing-data
collection. The mix matches the classic PBE-strings family: several
separator-extraction tasks hard enough for grammar effects to be measurable,
plus easy formatting, replacement, and conditional tasks.

benchmarks/generated: a seeded held-out suite built from task archetypes
(extraction, windowing, decoration, joining, replacement, flags) with
randomized separators, literals, and inputs. Every file is validated to be
solvable by the built-in enumerator and carries its generating solution as a
trailing comment; manifest.json aggregates them. Difficulty is classified by
the solver's deterministic candidate count, so regeneration is
machine-independent.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import replace
from pathlib import Path

from grt.core import (
    Apply,
    CATALOG,
    InputVar,
    IntLit,
    IoConstraint,
    Sort,
    StrLit,
    SygusProblem,
    default_grammar,
    evaluate,
    program_size,
)
from grt.enumerator import solve
from grt.sygus_format import ProblemFile, print_problem, program_to_text

FIRST_NAMES = [
    "john", "ann", "alexandra", "bo", "alice", "t", "sue", "maximillian",
    "ada", "li", "sam", "pat", "ron", "deborah", "gus", "kim", "omar", "zo",
]
LAST_NAMES = [
    "smith", "lee", "kay", "dale", "wong", "burr", "ellen", "p", "king",
    "wei", "hill", "dee", "cole", "marsh", "fring", "wexler", "diaz", "teal",
]

HANDWRITTEN = {
    # name: (string_literals, int_literals, n_vars, [(input(s), output)])
    "second-word": ((" ", "", "-", "."), (0, 1, 2, 3), 1, [
        (f"{a} {b}", b) for a, b in zip(FIRST_NAMES[:10], LAST_NAMES[:10])
    ]),
    "swap-words": ((" ", ""), (0, 1), 1, [
        (f"{a} {b}", f"{b} {a}") for a, b in zip(FIRST_NAMES[:6], LAST_NAMES[:6])
    ]),
    "email-domain": (("@", ".", "", "-"), (0, 1, 2, 3), 1, [
        (s, s.split("@")[1]) for s in
        ["a@b.c", "joanna@mail.com", "x@y.z", "sue@web.org", "thedoctor@q.io", "me@ex.net"]
    ]),
    "after-colon": ((":", " ", "", "-"), (0, 1, 2, 3), 1, [
        (s, s.split(":", 1)[1]) for s in
        ["id:42", "lastkey:val", "a:bc", "xx:1", "name:sue", "t:9z875"]
    ]),
    "after-equals": (("=", "", " ", "."), (0, 1, 2, 3), 1, [
        (s, s.split("=", 1)[1]) for s in
        ["k=v", "mode=fast", "x=12", "longflag=on", "q=zz9", "p=q"]
    ]),
    "after-slash": (("/", "", " ", "-"), (0, 1, 2, 3), 1, [
        (s, s.split("/", 1)[1]) for s in
        ["a/b", "usr/local", "x/yz12", "topdir/f", "w/9", "home/ada"]
    ]),
    "after-dash": (("-", " ", "", "."), (0, 1, 2, 3), 1, [
        (s, s.split("-", 1)[1]) for s in
        ["ab-cd", "xlongword-yz", "1-2", "q-rst", "foo-bar", "w9-k", "me-you",
         "ab2-cd3", "zz-top", "a-b"]
    ]),
    "stem": ((".", "-", " ", ""), (0, 1, 2, 3), 1, [
        (s, s.split(".", 1)[0]) for s in
        ["file.txt", "a.b", "readme.md", "x.y.z", "notes.doc", "img.png",
         "a1.b2", "w.v", "data.csv", "q.r"]
    ]),
    "flag-dash": (("-", "yes", "no"), (0, 1), 1, [
        ("a-b", "yes"), ("cd", "no"), ("-", "yes"), ("xyz", "no"),
        ("e-f", "yes"), ("ghjk", "no"),
    ]),
    "join-dash": (("-", " "), (0, 1), 2, [
        (("ab", "cd"), "ab-cd"), (("x", "y"), "x-y"), (("1", "23"), "1-23"),
        (("q", ""), "q-"), (("no", "go"), "no-go"), (("up", "dn"), "up-dn"),
    ]),
}


def _word(rng: random.Random, lo=1, hi=9, alphabet="abcdefghijklmnopqrstuvwxyz0123456789"):
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(lo, hi)))


def _t(name):
    return CATALOG[name]


def _sep_free_word(rng, sep, lo=1, hi=9):
    while True:
        w = _word(rng, lo, hi)
        if sep not in w:
            return w


# Archetype builders return (target AST, string literal pool, int pool,
# n_vars, input maker). Inputs vary in length so constant-offset shortcuts
# do not trivialize the task.

def _arch_after_sep(rng, sep):
    target = Apply(_t("str.substr"), (
        InputVar("x0"),
        Apply(_t("str.indexof"), (
            Apply(_t("str.++"), (StrLit(sep), InputVar("x0"))),
            StrLit(sep),
            IntLit(1),
        )),
        Apply(_t("str.len"), (InputVar("x0"),)),
    ))
    def make_input():
        return (f"{_sep_free_word(rng, sep)}{sep}{_sep_free_word(rng, sep)}",)
    lits = tuple(dict.fromkeys([sep, "", " ", "."]))
    return target, lits, (0, 1, 2, 3), 1, make_input


def _arch_before_sep(rng, sep):
    target = Apply(_t("str.substr"), (
        InputVar("x0"),
        IntLit(0),
        Apply(_t("str.indexof"), (InputVar("x0"), StrLit(sep), IntLit(0))),
    ))
    def make_input():
        return (f"{_sep_free_word(rng, sep)}{sep}{_sep_free_word(rng, sep)}",)
    lits = tuple(dict.fromkeys([sep, "", "-", " "]))
    return target, lits, (0, 1, 2, 3), 1, make_input


def _arch_window(rng):
    k = rng.randint(1, 3)
    m = rng.randint(2, 3)
    target = Apply(_t("str.substr"), (InputVar("x0"), IntLit(k), IntLit(m)))
    def make_input():
        return (_word(rng, k + m, k + m + 5),)
    return target, ("", "-", " "), (0, 1, 2, 3), 1, make_input


def _arch_last_k(rng):
    k = rng.randint(2, 3)
    target = Apply(_t("str.substr"), (
        InputVar("x0"),
        Apply(_t("-"), (Apply(_t("str.len"), (InputVar("x0"),)), IntLit(k))),
        IntLit(k),
    ))
    def make_input():
        return (_word(rng, k + 1, k + 7),)
    return target, ("", "-"), (0, 1, 2, 3), 1, make_input


def _arch_char_at(rng):
    k = rng.randint(0, 3)
    target = Apply(_t("str.at"), (InputVar("x0"), IntLit(k)))
    def make_input():
        return (_word(rng, k + 1, k + 6),)
    return target, ("", "."), (0, 1, 2, 3), 1, make_input


def _arch_decorate(rng):
    deco = rng.choice(["<", "[", "#", "* ", "id:"])
    closing = rng.choice(["", ">", "]"])
    inner = Apply(_t("str.++"), (InputVar("x0"), StrLit(closing))) if closing else InputVar("x0")
    target = Apply(_t("str.++"), (StrLit(deco), inner))
    def make_input():
        return (_word(rng, 1, 8),)
    return target, tuple(dict.fromkeys([deco, closing, " "])), (0, 1), 1, make_input


def _arch_self_join(rng):
    sep = rng.choice([" ", "-", "."])
    target = Apply(_t("str.++"), (
        InputVar("x0"), Apply(_t("str.++"), (StrLit(sep), InputVar("x0"))),
    ))
    def make_input():
        return (_word(rng, 1, 7),)
    return target, (sep, ""), (0, 1), 1, make_input


def _arch_join2(rng):
    sep = rng.choice([" ", "-", ",", ":"])
    first, second = ("x0", "x1") if rng.random() < 0.5 else ("x1", "x0")
    target = Apply(_t("str.++"), (
        InputVar(first), Apply(_t("str.++"), (StrLit(sep), InputVar(second))),
    ))
    def make_input():
        return (_word(rng, 1, 6), _word(rng, 1, 6))
    return target, (sep, ""), (0, 1), 2, make_input


def _arch_replace_sep(rng):
    a, b = rng.sample(["-", ".", ":", " ", "/"], 2)
    target = Apply(_t("str.replace"), (InputVar("x0"), StrLit(a), StrLit(b)))
    def make_input():
        w1, w2 = _sep_free_word(rng, a, 1, 5), _sep_free_word(rng, a, 1, 5)
        return (f"{w1}{a}{w2}" if rng.random() < 0.8 else w1,)
    return target, (a, b, ""), (0, 1), 1, make_input


def _arch_flag(rng):
    sep = rng.choice(["-", ".", "@", " "])
    yes, no = rng.sample(["yes", "no", "hit", "miss", "1", "0"], 2)
    target = Apply(_t("ite"), (
        Apply(_t("str.contains"), (InputVar("x0"), StrLit(sep))),
        StrLit(yes),
        StrLit(no),
    ))
    def make_input():
        w = _sep_free_word(rng, sep, 1, 6)
        return (f"{w}{sep}{_sep_free_word(rng, sep, 0, 4)}" if rng.random() < 0.5 else w,)
    return target, (sep, yes, no), (0, 1), 1, make_input


def _arch_len_digit(rng):
    target = Apply(_t("int.to.str"), (Apply(_t("str.len"), (InputVar("x0"),)),))
    def make_input():
        return (_word(rng, 0, 9),)
    return target, ("",), (0, 1), 1, make_input


def _arch_swap_words(rng):
    target = Apply(_t("str.substr"), (
        Apply(_t("str.++"), (InputVar("x0"), Apply(_t("str.++"), (StrLit(" "), InputVar("x0"))))),
        Apply(_t("str.indexof"), (
            Apply(_t("str.++"), (StrLit(" "), InputVar("x0"))), StrLit(" "), IntLit(1),
        )),
        Apply(_t("str.len"), (InputVar("x0"),)),
    ))
    def make_input():
        return (f"{rng.choice(FIRST_NAMES)} {rng.choice(LAST_NAMES)}",)
    return target, (" ", ""), (0, 1), 1, make_input


# (archetype builder, constraint count range, instances)
SUITE_PLAN = [
    (lambda rng: _arch_after_sep(rng, rng.choice(["-", ":", "@", "/", ";"])), (6, 9), 6),
    (lambda rng: _arch_after_sep(rng, " "), (6, 9), 2),
    (lambda rng: _arch_before_sep(rng, rng.choice(["-", ".", "@", ","])), (6, 9), 4),
    (_arch_window, (5, 8), 4),
    (_arch_last_k, (5, 8), 3),
    (_arch_char_at, (5, 8), 3),
    (_arch_decorate, (4, 7), 4),
    (_arch_self_join, (4, 7), 2),
    (_arch_join2, (4, 7), 3),
    (_arch_replace_sep, (5, 8), 2),
    (_arch_flag, (5, 8), 2),
    (_arch_len_digit, (5, 8), 1),
    (_arch_swap_words, (5, 6), 1),
]


def build_generated(seed: int, timeout: float):
    rng = random.Random(f"suite:{seed}")
    kept = []
    manifest = []
    for arch_idx, (builder, n_cons_range, instances) in enumerate(SUITE_PLAN):
        made = 0
        attempts = 0
        while made < instances:
            attempts += 1
            if attempts > 400:
                raise SystemExit(f"archetype {arch_idx}: only {made} of {instances} built")
            target, slits, ilits, n_vars, make_input = builder(rng)
            var_names = tuple(f"x{i}" for i in range(n_vars))
            grammar = default_grammar(
                string_literals=slits,
                int_literals=ilits,
                input_vars=tuple((v, Sort.STRING) for v in var_names),
            )
            n_cons = rng.randint(*n_cons_range)
            inputs_list = [make_input() for _ in range(n_cons)]
            outputs = [evaluate(target, ins, var_names) for ins in inputs_list]
            if len(set(outputs)) < 2 or any(len(o) > 24 for o in outputs):
                continue
            if all(o == i[0] for o, i in zip(outputs, inputs_list)):
                continue
            constraints = tuple(IoConstraint(i, o) for i, o in zip(inputs_list, outputs))
            problem = SygusProblem(grammar, constraints, timeout_s=timeout)
            result = solve(problem)
            if not result.solved:
                continue
            made += 1
            kept.append((target, problem, result))
            manifest.append({
                "id": f"gen-{len(kept):03d}",
                "archetype": arch_idx,
                "target": program_to_text(target),
                "target_size": program_size(target),
                "solved_size": program_size(result.program),
                "baseline_s": round(result.elapsed_s, 4),
                "explored": result.programs_explored,
            })
            print(
                f"kept gen-{len(kept):03d} t={result.elapsed_s:6.3f}s "
                f"explored={result.programs_explored:8d} "
                f"target={program_to_text(target)}",
                file=sys.stderr,
            )
    return kept, manifest


def write_handwritten(root: Path):
    out = root / "handwritten"
    out.mkdir(parents=True, exist_ok=True)
    for old in out.glob("*.sl"):
        old.unlink()
    for name, (slits, ilits, n_vars, ios) in HANDWRITTEN.items():
        var_names = tuple(f"x{i}" for i in range(n_vars))
        grammar = default_grammar(
            string_literals=slits,
            int_literals=ilits,
            input_vars=tuple((v, Sort.STRING) for v in var_names),
        )
        constraints = tuple(
            IoConstraint(io[0] if isinstance(io[0], tuple) else (io[0],), io[1])
            for io in ios
        )
        problem = SygusProblem(grammar, constraints)
        text = print_problem(ProblemFile(None, problem, "f"))
        (out / f"{name}.sl").write_text(text, encoding="utf-8")
    print(f"wrote {len(HANDWRITTEN)} handwritten benchmarks to {out}", file=sys.stderr)


def write_generated(root: Path, seed: int, timeout: float):
    out = root / "generated"
    out.mkdir(parents=True, exist_ok=True)
    for old in out.glob("*.sl"):
        old.unlink()
    kept, manifest = build_generated(seed, timeout)
    for i, (target, problem, _) in enumerate(kept, start=1):
        text = print_problem(ProblemFile(None, replace(problem, timeout_s=3600.0), "f"))
        text += f"; known solution: {program_to_text(target)}\n"
        (out / f"gen-{i:03d}.sl").write_text(text, encoding="utf-8")
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(kept)} generated benchmarks to {out}", file=sys.stderr)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--root", type=Path, default=Path(__file__).resolve().parent.parent / "benchmarks")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--timeout", type=float, default=12.0)
    parser.add_argument("--skip-generated", action="store_true")
    args = parser.parse_args()
    write_handwritten(args.root)
    if not args.skip_generated:
        write_generated(args.root, args.seed, args.timeout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
