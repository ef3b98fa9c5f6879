"""Training-set construction: criticality labels and per-terminal time deltas.

Criticality samples pair a fabricated input-output example with the terminal
occurrence bit vector of the program that generated it. Timing samples record,
for every (problem, terminal) pair, the synthesis-time difference between the
full grammar and the grammar with that terminal dropped.

Dataset files are newline-delimited JSON with a schema-version header line
that pins the terminal ordering; saving a loaded file reproduces it byte for
byte.
"""

from __future__ import annotations

import json
import random
import statistics
from dataclasses import dataclass, replace
from typing import Callable, Sequence

from .core import (
    Grammar,
    IoConstraint,
    ProgramAst,
    SygusProblem,
    evaluate,
    terminals_used,
)
from .enumerator import SynthesisResult, stream

ALPHABET = "abcdefghijklmnopqrstuvwxyz0123456789 -."
DEFAULT_LENGTH_RANGE = (0, 12)
DEFAULT_N_PROGRAMS = 4000
DEFAULT_INPUTS_PER_PROGRAM = 5
DEFAULT_TIME_BUDGET_S = 1.5
DEFAULT_TIMING_REPEATS = 3


@dataclass(frozen=True)
class CritSample:
    constraint: IoConstraint
    label: tuple[int, ...]
    program_id: str


@dataclass(frozen=True)
class TimeSample:
    terminal: str
    problem_id: str
    t_full_s: float
    t_dropped_s: float
    delta_s: float


def random_input(
    rng: random.Random,
    length_range: tuple[int, int] = DEFAULT_LENGTH_RANGE,
    alphabet: str = ALPHABET,
) -> str:
    lo, hi = length_range
    if lo > hi:
        raise ValueError(f"empty length range {length_range}")
    n = rng.randint(lo, hi)
    return "".join(rng.choice(alphabet) for _ in range(n))


def occurrence_label(program: ProgramAst, grammar: Grammar) -> tuple[int, ...]:
    used = terminals_used(program)
    return tuple(1 if name in used else 0 for name in grammar.terminal_names)


def gen_crit_dataset(
    grammar: Grammar,
    n_programs: int = DEFAULT_N_PROGRAMS,
    inputs_per_program: int = DEFAULT_INPUTS_PER_PROGRAM,
    seed: int = 0,
    shuffle_seed: int | None = None,
) -> list[CritSample]:
    """Stream programs, fabricate examples for each, label by occurrence.

    Inputs are keyed to (seed, stream index), so shuffling with a different
    ``shuffle_seed`` permutes the dataset without changing its contents.
    """
    if n_programs < 1 or inputs_per_program < 1:
        raise ValueError("n_programs and inputs_per_program must be positive")
    programs = stream(grammar, n_programs)
    order = list(range(len(programs)))
    eff_shuffle = seed if shuffle_seed is None else shuffle_seed
    random.Random(f"crit-shuffle:{eff_shuffle}").shuffle(order)
    var_names = grammar.var_names
    samples = []
    for idx in order:
        program = programs[idx]
        rng = random.Random(f"crit-inputs:{seed}:{idx}")
        label = occurrence_label(program, grammar)
        pid = f"p{idx:05d}"
        for _ in range(inputs_per_program):
            inputs = tuple(random_input(rng) for _ in var_names)
            output = evaluate(program, inputs, var_names)
            samples.append(CritSample(IoConstraint(inputs, output), label, pid))
    return samples


def group_constraints(samples: Sequence[CritSample]) -> dict[str, list[IoConstraint]]:
    """Constraint sets per generating program, in first-seen order."""
    groups: dict[str, list[IoConstraint]] = {}
    for s in samples:
        groups.setdefault(s.program_id, []).append(s.constraint)
    return groups


def draw_crit_problems(
    samples: Sequence[CritSample],
    grammar: Grammar,
    k: int,
    seed: int = 0,
) -> list[tuple[str, SygusProblem]]:
    """Sample k whole problems (grammar + one program's constraints)."""
    groups = group_constraints(samples)
    pids = sorted(groups)
    if k > len(pids):
        raise ValueError(f"asked for {k} problems, dataset has {len(pids)}")
    rng = random.Random(f"crit-draw:{seed}")
    chosen = rng.sample(pids, k)
    return [(pid, SygusProblem(grammar, tuple(groups[pid]))) for pid in chosen]


def gen_time_dataset(
    problems: Sequence[SygusProblem],
    solver: Callable[[SygusProblem], SynthesisResult],
    budget_s: float = DEFAULT_TIME_BUDGET_S,
    ids: Sequence[str] | None = None,
    repeats: int = DEFAULT_TIMING_REPEATS,
) -> list[TimeSample]:
    """Measure full-vs-dropped synthesis times for every (problem, terminal).

    Times are medians over ``repeats`` runs and are capped at the budget;
    a timed-out run is recorded at the budget itself. The solver is
    deterministic, so a run that hits the budget is not repeated.
    """
    if ids is None:
        ids = [f"problem{i:03d}" for i in range(len(problems))]
    if len(ids) != len(problems):
        raise ValueError("ids and problems must have equal length")
    samples = []
    for pid, problem in zip(ids, problems):
        capped = replace(problem, timeout_s=budget_s)
        t_full = _median_time(solver, capped, repeats, budget_s)
        for name in problem.grammar.terminal_names:
            dropped = replace(capped, grammar=problem.grammar.drop(name))
            t_drop = _median_time(solver, dropped, repeats, budget_s)
            samples.append(TimeSample(name, pid, t_full, t_drop, t_full - t_drop))
    return samples


def _median_time(solver, problem, repeats: int, budget_s: float) -> float:
    times = []
    for _ in range(repeats):
        result = solver(problem)
        if not result.solved:
            return budget_s
        times.append(min(result.elapsed_s, budget_s))
    return statistics.median(times)


# --- Dataset files ---------------------------------------------------------------


def _dump(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=True)


def save_crit_dataset(path, samples: Sequence[CritSample], terminal_names: Sequence[str]) -> None:
    header = {"schema": "grt.crit", "version": 1, "terminals": list(terminal_names)}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_dump(header) + "\n")
        for s in samples:
            row = {
                "program_id": s.program_id,
                "inputs": list(s.constraint.inputs),
                "output": s.constraint.output,
                "label": list(s.label),
            }
            fh.write(_dump(row) + "\n")


def load_crit_dataset(path) -> tuple[list[CritSample], tuple[str, ...]]:
    with open(path, "r", encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("schema") != "grt.crit" or header.get("version") != 1:
            raise ValueError(f"{path}: not a criticality dataset file")
        terminals = tuple(header["terminals"])
        samples = []
        for line in fh:
            row = json.loads(line)
            samples.append(
                CritSample(
                    IoConstraint(tuple(row["inputs"]), row["output"]),
                    tuple(row["label"]),
                    row["program_id"],
                )
            )
    return samples, terminals


def save_time_dataset(path, samples: Sequence[TimeSample], terminal_names: Sequence[str]) -> None:
    header = {"schema": "grt.time", "version": 1, "terminals": list(terminal_names)}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_dump(header) + "\n")
        for s in samples:
            row = {
                "terminal": s.terminal,
                "problem_id": s.problem_id,
                "t_full_s": s.t_full_s,
                "t_dropped_s": s.t_dropped_s,
                "delta_s": s.delta_s,
            }
            fh.write(_dump(row) + "\n")


def load_time_dataset(path) -> tuple[list[TimeSample], tuple[str, ...]]:
    with open(path, "r", encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("schema") != "grt.time" or header.get("version") != 1:
            raise ValueError(f"{path}: not a timing dataset file")
        terminals = tuple(header["terminals"])
        samples = []
        for line in fh:
            row = json.loads(line)
            samples.append(
                TimeSample(
                    row["terminal"],
                    row["problem_id"],
                    row["t_full_s"],
                    row["t_dropped_s"],
                    row["delta_s"],
                )
            )
    return samples, terminals
