"""Shearer-type bound: a random subset of product registers carries a 1/k share of the information.

For ``Psi_{UV}`` whose ``U = U_1 ... U_m`` marginal is a product and a random
set ``S`` with each index included with probability ``1/k``,
``E_S I(U_S; V) <= I(U; V) / k``. The expectation is computed exactly by
summing over all ``2^m`` subsets.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ..errors import DomainError
from ..qmath.measures import mutual_information
from ..qmath.registers import RegisterSystem
from ..qmath.sampling import random_isometry, random_state
from ..qmath.states import Isometry, PureState, State, apply_isometry, marginal, tensor
from ..rng import stream
from .report import LemmaReport, run_trials

SHEARER_TOL = 1e-8
MAX_FACTORS = 4


@dataclass(frozen=True, eq=False)
class ShearerInstance:
    """State on ``U_1..U_m`` and a receiver group ``v``; ``k`` sets inclusion probability ``1/k``."""

    state: State
    us: tuple[str, ...]
    v: tuple[str, ...]
    k: float

    def __post_init__(self):
        if self.k < 1:
            raise DomainError("k must be at least 1")
        if not 1 <= len(self.us) <= MAX_FACTORS:
            raise DomainError(f"between 1 and {MAX_FACTORS} factors supported")

    def expected_information(self) -> float:
        """``E_S I(U_S; V)`` with independent inclusion probability ``1/k``."""
        m, q = len(self.us), 1.0 / self.k
        total = 0.0
        for size in range(1, m + 1):
            weight = q**size * (1 - q) ** (m - size)
            for subset in combinations(self.us, size):
                total += weight * mutual_information(self.state, subset, self.v)
        return total

    def bound(self) -> float:
        return mutual_information(self.state, self.us, self.v) / self.k

    def slack(self) -> float:
        return self.bound() - self.expected_information()


def product_factor_instance(factors: list[State], k: float) -> ShearerInstance:
    """``Psi = (x)_i psi_{U_i V_i}``; factor ``i`` must use registers ``U``/``V`` and is renamed."""
    state = None
    for i, f in enumerate(factors, start=1):
        f = f.rename({"U": f"U{i}", "V": f"V{i}"})
        state = f if state is None else tensor(state, f)
    m = len(factors)
    return ShearerInstance(state, tuple(f"U{i}" for i in range(1, m + 1)), tuple(f"V{i}" for i in range(1, m + 1)), k)


def bell_factor() -> PureState:
    return PureState(RegisterSystem.of(U=2, V=2), np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2))


def _random_factor(rng) -> State:
    system = RegisterSystem.of(U=2, V=2)
    kind = rng.integers(3)
    if kind == 0:
        return random_state(system, "pure", seed=rng)
    if kind == 1:
        return tensor(random_state(RegisterSystem.of(U=2), "mixed", seed=rng), random_state(RegisterSystem.of(V=2), "mixed", seed=rng))
    return random_state(system, "mixed", int(rng.integers(1, 5)), seed=rng)


def correlated_instance(m: int, k: float, rng) -> ShearerInstance:
    """Product ``U`` marginal, but ``V`` is a random isometry of all purifiers jointly."""
    state = None
    for i in range(1, m + 1):
        f = random_state(RegisterSystem.of(**{f"U{i}": 2, f"R{i}": 2}), "pure", seed=rng)
        state = f if state is None else tensor(state, f)
    refs = tuple(f"R{i}" for i in range(1, m + 1))
    dv = 2**m
    iso = Isometry(refs, (("V", dv), ("E", 2)), random_isometry(dv, 2 * dv, rng))
    out = apply_isometry(state, iso)
    us = tuple(f"U{i}" for i in range(1, m + 1))
    return ShearerInstance(marginal(out, us + ("V",)), us, ("V",), k)


def random_instance(seed: int, trial: int, family: str = "both") -> ShearerInstance:
    rng = stream(seed, "shearer", trial)
    m = int(rng.integers(1, MAX_FACTORS + 1))
    k = int(rng.integers(2, 5))
    use_correlated = family == "correlated" or (family == "both" and trial % 2 == 1)
    if use_correlated:
        return correlated_instance(m, k, rng)
    if family not in ("both", "product"):
        raise DomainError(f"unknown family {family!r}")
    return product_factor_instance([_random_factor(rng) for _ in range(m)], k)


def verify_shearer(trials: int = 500, seed: int = 0, family: str = "both", tol: float = SHEARER_TOL) -> LemmaReport:
    """Max over random instances of ``E_S I(U_S;V) - I(U;V)/k``.

    ``product`` draws factor states on each ``(U_i, V_i)``; ``correlated``
    keeps the ``U`` marginal a product while entangling every factor with one
    receiver; ``both`` alternates.
    """
    return run_trials("shearer", lambda t: random_instance(seed, t, family).slack(), trials, tol)
