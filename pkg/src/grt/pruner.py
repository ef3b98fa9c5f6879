"""Grammar reduction: combine criticality votes with measured time savings.

Per terminal, the savings table holds the mean synthesis-time delta caused by
dropping it (positive means dropping helps). A reduction keeps the grammar
minus at most two terminals: of the three largest positive savers, the two
with the fewest criticality votes go. A criticality-only variant drops the
two least-voted terminals outright. The fallback scheduler picks how long to
trust the reduced grammar before retrying with the full one.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .core import Grammar, IoConstraint, SygusProblem
from .enumerator import SynthesisResult
from .neural import ModelWeights, predict_bits

DEFAULT_FALLBACK_GRID: tuple[float, ...] = (1, 2, 5, 10, 20, 30, 60, 120, 300, 600)
MAX_REMOVALS = 2
CANDIDATE_POOL = 3


@dataclass
class SavingsTable:
    """Mean per-terminal time saved by dropping it, with sample counts.

    Capped (timed-out) measurements are included in the mean; the counts say
    how many samples back each figure.
    """

    means: dict[str, float]
    counts: dict[str, int]

    def positive(self) -> list[tuple[str, float]]:
        """Terminals worth considering for removal, best saver first."""
        items = [(g, a) for g, a in self.means.items() if a > 0]
        return sorted(items, key=lambda ga: (-ga[1], ga[0]))


def savings(time_dataset) -> SavingsTable:
    if not time_dataset:
        raise ValueError("empty timing dataset")
    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    for s in time_dataset:
        sums[s.terminal] = sums.get(s.terminal, 0.0) + s.delta_s
        counts[s.terminal] = counts.get(s.terminal, 0) + 1
    means = {g: sums[g] / counts[g] for g in sums}
    return SavingsTable(means, counts)


def vote(
    weights: ModelWeights,
    constraints: Sequence[IoConstraint],
    threshold: float = 0.5,
) -> np.ndarray:
    """Sum of per-constraint binary criticality predictions."""
    if not constraints:
        raise ValueError("no constraints to vote on")
    counts = np.zeros(len(weights.terminal_names), dtype=np.int64)
    for c in constraints:
        counts += predict_bits(weights, c, threshold)
    return counts


@dataclass
class PruneDecision:
    removed: tuple[str, ...]
    candidates: tuple[tuple[str, float], ...]
    votes: tuple[int, ...]
    reduced: Grammar

    def to_dict(self) -> dict:
        return {
            "removed": list(self.removed),
            "candidates": [[g, a] for g, a in self.candidates],
            "votes": list(self.votes),
            "kept_terminals": list(self.reduced.terminal_names),
        }


def decide(grammar: Grammar, table: SavingsTable, votes: Sequence[int]) -> PruneDecision:
    """Drop the least-voted two of the three best positive savers.

    Ties in savings and in votes break by terminal name. With fewer than two
    positive savers only those are removed; with none the grammar is returned
    unchanged.
    """
    names = grammar.terminal_names
    votes = tuple(int(v) for v in votes)
    if len(votes) != len(names):
        raise ValueError(f"{len(votes)} votes for {len(names)} terminals")
    vote_of = dict(zip(names, votes))
    candidates = [(g, a) for g, a in table.positive() if g in vote_of][:CANDIDATE_POOL]
    by_votes = sorted(candidates, key=lambda ga: (vote_of[ga[0]], ga[0]))
    removed = tuple(sorted(g for g, _ in by_votes[:MAX_REMOVALS]))
    reduced = grammar
    for g in removed:
        reduced = reduced.drop(g)
    return PruneDecision(removed, tuple(candidates), votes, reduced)


def decide_crit_only(grammar: Grammar, votes: Sequence[int]) -> PruneDecision:
    """Ablation: drop the two least-voted terminals, ignoring time savings."""
    names = grammar.terminal_names
    votes = tuple(int(v) for v in votes)
    if len(votes) != len(names):
        raise ValueError(f"{len(votes)} votes for {len(names)} terminals")
    by_votes = sorted(zip(names, votes), key=lambda gv: (gv[1], gv[0]))
    removed = tuple(sorted(g for g, _ in by_votes[:MAX_REMOVALS]))
    reduced = grammar
    for g in removed:
        reduced = reduced.drop(g)
    return PruneDecision(removed, (), votes, reduced)


def fallback_cost(x: float, runs: Sequence[tuple[float, float]], timeout_s: float) -> float:
    """Total expected synthesis time when switching grammars at budget x."""
    total = 0.0
    for t_reduced, t_full in runs:
        if t_reduced < x:
            total += t_reduced
        else:
            total += min(x + t_full, timeout_s)
    return total


def fallback_point(
    runs: Sequence[tuple[float, float]],
    timeout_s: float,
    grid: Sequence[float] = DEFAULT_FALLBACK_GRID,
) -> float:
    """Grid point minimizing the total switching cost; ties pick the smallest x."""
    if not grid:
        raise ValueError("empty fallback grid")
    return min(grid, key=lambda x: (fallback_cost(x, runs, timeout_s), x))


def run_with_fallback(
    problem: SygusProblem,
    reduced: Grammar,
    x: float,
    solver: Callable[[SygusProblem], SynthesisResult],
) -> SynthesisResult:
    """Try the reduced grammar for x seconds, then the full grammar for the rest.

    The two phases run strictly in sequence and the combined wall time never
    exceeds the problem's own budget.
    """
    if x > problem.timeout_s:
        raise ValueError(f"fallback point {x} exceeds problem timeout {problem.timeout_s}")
    first = solver(replace(problem, grammar=reduced, timeout_s=x))
    if first.solved:
        return first
    remaining = problem.timeout_s - x
    if remaining <= 0:
        return first
    second = solver(replace(problem, timeout_s=remaining))
    explored = first.programs_explored + second.programs_explored
    elapsed = min(first.elapsed_s + second.elapsed_s, problem.timeout_s)
    if second.solved:
        return SynthesisResult(True, second.program, elapsed, explored)
    return SynthesisResult(False, None, elapsed, explored, exhausted=second.exhausted)
