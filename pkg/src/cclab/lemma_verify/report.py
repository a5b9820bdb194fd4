"""Uniform verification report shared by every lemma check."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable


@dataclass(frozen=True)
class LemmaReport:
    """``max_violation`` is ``-min(slack)``: positive only when some check failed."""

    lemma: str
    trials: int
    max_violation: float
    worst_seed: int
    tol: float
    notes: tuple[str, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol

    def to_json(self) -> dict:
        out = {
            "lemma": self.lemma,
            "trials": self.trials,
            "max_violation": self.max_violation,
            "worst_seed": self.worst_seed,
            "pass": self.passed,
        }
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def collect(lemma: str, slacks: Iterable[float], tol: float, notes: tuple[str, ...] = ()) -> LemmaReport:
    """Fold per-trial slacks into a report; ``worst_seed`` is the trial index of the smallest."""
    worst, worst_i, n = math.inf, 0, 0
    for i, s in enumerate(slacks):
        n += 1
        if s < worst:
            worst, worst_i = s, i
    if n == 0:
        worst = 0.0
    return LemmaReport(lemma, n, -worst, worst_i, tol, tuple(notes))


def run_trials(lemma: str, check: Callable[[int], float], trials: int, tol: float, notes=()) -> LemmaReport:
    return collect(lemma, (check(i) for i in range(trials)), tol, tuple(notes))
