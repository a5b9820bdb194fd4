"""Exact numerical checks of the information-theoretic lemmas on small instances."""

from __future__ import annotations

from typing import Callable

from .cutpaste import CutPasteTrace, cut_and_paste_trace, verify_cut_and_paste, verify_cut_and_paste_suite
from .decoupling import decouple, verify_decoupling
from .directsum import (
    verify_multiround_classical,
    verify_multiround_quantum,
    verify_oneway_classical,
    verify_oneway_quantum,
)
from .report import LemmaReport
from .shearer import ShearerInstance, verify_shearer
from .toy import ToyQuantumProtocol, kron_protocols, qic_of, random_toy_protocol, verify_qic


def _onerd(trials: int, seed: int, tol: float | None) -> list[LemmaReport]:
    kw = {} if tol is None else {"tol": tol}
    return [verify_oneway_classical(seed=seed, **kw), verify_oneway_quantum(cases=trials, seed=seed, **kw)]


def _multird(trials: int, seed: int, tol: float | None) -> list[LemmaReport]:
    kw = {} if tol is None else {"tol": tol}
    return [verify_multiround_classical(cases=trials, seed=seed, **kw), verify_multiround_quantum(seed=seed, **kw)]


def _single(fn: Callable[..., LemmaReport]):
    def run(trials: int, seed: int, tol: float | None) -> list[LemmaReport]:
        kw = {} if tol is None else {"tol": tol}
        return [fn(trials, seed, **kw)]

    return run


# name -> (runner(trials, seed, tol), default trials)
LEMMAS: dict[str, tuple[Callable[[int, int, float | None], list[LemmaReport]], int]] = {
    "shearer": (_single(verify_shearer), 500),
    "decoupling": (_single(verify_decoupling), 200),
    "onerd": (_onerd, 100),
    "multird": (_multird, 100),
    "cutpaste": (_single(verify_cut_and_paste_suite), 50),
    "qic": (_single(verify_qic), 100),
}


def run_lemmas(which: str = "all", trials: int | None = None, seed: int = 0, tol: float | None = None) -> list[LemmaReport]:
    names = list(LEMMAS) if which == "all" else [which]
    out: list[LemmaReport] = []
    for name in names:
        runner, default = LEMMAS[name]
        out.extend(runner(default if trials is None else trials, seed, tol))
    return out


__all__ = [
    "CutPasteTrace",
    "LEMMAS",
    "LemmaReport",
    "ShearerInstance",
    "ToyQuantumProtocol",
    "cut_and_paste_trace",
    "decouple",
    "kron_protocols",
    "qic_of",
    "random_toy_protocol",
    "run_lemmas",
    "verify_cut_and_paste",
    "verify_cut_and_paste_suite",
    "verify_decoupling",
    "verify_multiround_classical",
    "verify_multiround_quantum",
    "verify_oneway_classical",
    "verify_oneway_quantum",
    "verify_qic",
    "verify_shearer",
]
