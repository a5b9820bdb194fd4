"""Randomised checks of the standard distance and entropy inequalities.

Each check draws one random instance from its own seeded stream and returns a
slack: non-negative when the inequality holds, negative by the size of the
violation otherwise. Equalities report ``-|lhs - rhs|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..rng import stream
from .measures import (
    conditional_mutual_information,
    fidelity,
    hellinger,
    mutual_information,
    relative_entropy,
    trace_distance,
    vn_entropy,
)
from .prob import ProbTable, classical_cmi, classical_mi, shannon_entropy
from .registers import RegisterSystem
from .sampling import random_channel, random_probs, random_state
from .states import DensityMatrix, PureState, embed_diagonal, partial_trace, tensor

DEFAULT_TOL = 1e-8
CLASSICAL_TOL = 1e-10
NAMES = "ABC"


def _random_system(rng: np.random.Generator, n_regs: int | None = None) -> RegisterSystem:
    n = int(rng.integers(2, 4)) if n_regs is None else n_regs
    return RegisterSystem(tuple((NAMES[i], int(rng.integers(2, 5))) for i in range(n)))


def _random_density(rng: np.random.Generator, system: RegisterSystem, full_rank: bool = False) -> DensityMatrix:
    """Pure, low-rank or full-rank state; always full rank when ``full_rank``."""
    if full_rank:
        return random_state(system, "mixed", system.dim, seed=rng)
    kind = rng.integers(3)
    if kind == 0:
        return random_state(system, "pure", seed=rng).density()
    rank = int(rng.integers(1, system.dim + 1)) if kind == 1 else system.dim
    return random_state(system, "mixed", rank, seed=rng)


def fuchs_van_de_graaf(rng) -> float:
    system = _random_system(rng)
    rho, sigma = _random_density(rng, system), _random_density(rng, system)
    f, t = fidelity(rho, sigma), trace_distance(rho, sigma)
    return min(t - 2 * (1 - f), 2 * math.sqrt(max(1 - f * f, 0.0)) - t)


def pure_trace_distance(rng) -> float:
    system = _random_system(rng)
    phi = random_state(system, "pure", seed=rng)
    psi = random_state(system, "pure", seed=rng)
    ov = abs(phi.overlap(psi))
    return -abs(trace_distance(phi, psi) - 2 * math.sqrt(max(1 - ov * ov, 0.0)))


def monotonicity(rng) -> float:
    system = _random_system(rng)
    rho, sigma = _random_density(rng, system), _random_density(rng, system)
    keep = [n for n in system.names if rng.random() < 0.5] or [system.names[0]]
    if len(keep) == len(system):
        keep = keep[:-1]
    r_a, s_a = partial_trace(rho, keep), partial_trace(sigma, keep)
    slack = min(
        fidelity(r_a, s_a) - fidelity(rho, sigma),
        trace_distance(rho, sigma) - trace_distance(r_a, s_a),
        hellinger(rho, sigma) - hellinger(r_a, s_a),
    )
    target = system.names[int(rng.integers(len(system)))]
    out_dim = int(rng.integers(2, 4))
    env_dim = -(-system.dim_of((target,)) // out_dim) + int(rng.integers(0, 2))
    channel_seed = int(rng.integers(2**62))
    apply = lambda st: random_channel(st, (target,), (("OUT", out_dim),), env_dim, seed=channel_seed)
    r_c, s_c = apply(rho), apply(sigma)
    return min(
        slack,
        fidelity(r_c, s_c) - fidelity(rho, sigma),
        trace_distance(rho, sigma) - trace_distance(r_c, s_c),
        hellinger(rho, sigma) - hellinger(r_c, s_c),
    )


def _classical_mixture(label: RegisterSystem, weights, parts: list[DensityMatrix]) -> DensityMatrix:
    d = label.dim
    blocks = np.zeros((d * parts[0].system.dim,) * 2, dtype=complex)
    size = parts[0].system.dim
    for i, (w, part) in enumerate(zip(weights, parts)):
        blocks[i * size:(i + 1) * size, i * size:(i + 1) * size] = w * part.matrix
    return DensityMatrix(label.concat(parts[0].system), blocks)


def joint_linearity(rng) -> float:
    label = RegisterSystem.of(I=int(rng.integers(2, 4)))
    inner = RegisterSystem.of(S=int(rng.integers(2, 4)))
    p, q = random_probs(label.dim, rng), random_probs(label.dim, rng)
    rhos = [_random_density(rng, inner) for _ in range(label.dim)]
    sigmas = [_random_density(rng, inner) for _ in range(label.dim)]
    lhs = fidelity(_classical_mixture(label, p, rhos), _classical_mixture(label, q, sigmas))
    rhs = sum(math.sqrt(pi * qi) * fidelity(r, s) for pi, qi, r, s in zip(p, q, rhos, sigmas))
    return -abs(lhs - rhs)


def araki_lieb(rng) -> float:
    system = _random_system(rng, 2)
    rho = _random_density(rng, system)
    sa, sb, sab = vn_entropy(rho, "A"), vn_entropy(rho, "B"), vn_entropy(rho)
    return min(sab - abs(sa - sb), sa + sb - sab)


def _pinsker_pair(rng):
    system = _random_system(rng)
    rho = _random_density(rng, system)
    sigma = _random_density(rng, system, full_rank=True)
    return rho, sigma, relative_entropy(rho, sigma)


def pinsker_sqrt_d(rng) -> float:
    """``||rho - sigma||_1 <= sqrt(D)`` with D in bits, exactly as commonly quoted."""
    rho, sigma, d = _pinsker_pair(rng)
    return math.sqrt(d) - trace_distance(rho, sigma)


def pinsker_natural(rng) -> float:
    """``||rho - sigma||_1 <= sqrt(2 ln 2 D)``, the sharp form for D in bits."""
    rho, sigma, d = _pinsker_pair(rng)
    return math.sqrt(2 * math.log(2) * d) - trace_distance(rho, sigma)


def hellinger_vs_relative_entropy(rng) -> float:
    rho, sigma, d = _pinsker_pair(rng)
    return d - hellinger(rho, sigma) ** 2


def mutual_information_minimality(rng) -> float:
    system = _random_system(rng, 2)
    rho = _random_density(rng, system)
    sx = _random_density(rng, system.select("A"), full_rank=True)
    ty = _random_density(rng, system.select("B"), full_rank=True)
    mi = mutual_information(rho, "A", "B")
    product = tensor(partial_trace(rho, "A"), partial_trace(rho, "B"))
    return min(
        relative_entropy(rho, tensor(sx, ty)) - mi,
        math.sqrt(max(mi, 0.0)) - hellinger(rho, product),
    )


def mutual_information_as_divergence(rng) -> float:
    system = _random_system(rng, 2)
    rho = _random_density(rng, system)
    product = tensor(partial_trace(rho, "A"), partial_trace(rho, "B"))
    d = relative_entropy(rho, product)
    return -abs(d - mutual_information(rho, "A", "B"))


def strong_subadditivity(rng) -> float:
    system = _random_system(rng, 3)
    rho = _random_density(rng, system)
    return conditional_mutual_information(rho, "A", "C", "B")


def cmi_dimension_bound(rng) -> float:
    system = _random_system(rng, 3)
    rho = _random_density(rng, system)
    return 2 * math.log2(system.dim_of(("B",))) - conditional_mutual_information(rho, "A", "B", "C")


def data_processing(rng) -> float:
    """X = f(Y) classical, B quantum: I(X;B) <= I(Y;B)."""
    dy, dx, db = int(rng.integers(2, 5)), int(rng.integers(1, 4)), int(rng.integers(2, 4))
    f = rng.integers(dx, size=dy)
    p = random_probs(dy, rng)
    system = RegisterSystem.of(X=dx, Y=dy, B=db)
    m = np.zeros((system.dim, system.dim), dtype=complex)
    for y in range(dy):
        rho_y = _random_density(rng, system.select("B"))
        e = np.zeros(dx * dy)
        e[f[y] * dy + y] = 1.0
        m += p[y] * np.kron(np.outer(e, e), rho_y.matrix)
    rho = DensityMatrix(system, m)
    return mutual_information(rho, "Y", "B") - mutual_information(rho, "X", "B")


def _random_table(rng) -> ProbTable:
    supports = [tuple(range(int(rng.integers(2, 4)))) for _ in range(3)]
    variables = list(zip("XYZ", supports))
    w = random_probs(int(np.prod([len(s) for s in supports])), rng, concentration=0.5)
    return ProbTable.from_weights(variables, w)


def diagonal_consistency(rng) -> float:
    p = _random_table(rng)
    rho = embed_diagonal(p)
    diffs = [
        shannon_entropy(p, "X,Z") - vn_entropy(rho, ("X", "Z")),
        classical_mi(p, "X", "Y") - mutual_information(rho, "X", "Y"),
        classical_cmi(p, "X", "Y", "Z") - conditional_mutual_information(rho, "X", "Y", "Z"),
    ]
    return -max(abs(d) for d in diffs)


def chain_rule(rng) -> float:
    p = _random_table(rng)
    lhs = classical_mi(p, "X", "Y,Z")
    rhs = classical_mi(p, "X", "Y") + classical_cmi(p, "X", "Z", "Y")
    return -abs(lhs - rhs)


@dataclass(frozen=True)
class Invariant:
    name: str
    check: Callable[[np.random.Generator], float]
    tol: float = DEFAULT_TOL


INVARIANTS: dict[str, Invariant] = {
    inv.name: inv
    for inv in (
        Invariant("fuchs_van_de_graaf", fuchs_van_de_graaf),
        Invariant("pure_trace_distance", pure_trace_distance),
        Invariant("monotonicity", monotonicity),
        Invariant("joint_linearity", joint_linearity),
        Invariant("araki_lieb", araki_lieb),
        Invariant("pinsker_sqrt_d", pinsker_sqrt_d),
        Invariant("pinsker_natural", pinsker_natural),
        Invariant("hellinger_vs_relative_entropy", hellinger_vs_relative_entropy),
        Invariant("mutual_information_minimality", mutual_information_minimality),
        Invariant("mutual_information_as_divergence", mutual_information_as_divergence),
        Invariant("strong_subadditivity", strong_subadditivity),
        Invariant("cmi_dimension_bound", cmi_dimension_bound),
        Invariant("data_processing", data_processing),
        Invariant("diagonal_consistency", diagonal_consistency, CLASSICAL_TOL),
        Invariant("chain_rule", chain_rule, CLASSICAL_TOL),
    )
}


@dataclass(frozen=True)
class InvariantReport:
    name: str
    trials: int
    max_violation: float
    worst_seed: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol

    def to_json(self) -> dict:
        return {
            "lemma": self.name,
            "trials": self.trials,
            "max_violation": self.max_violation,
            "worst_seed": self.worst_seed,
            "pass": self.passed,
        }


def run_invariant(name: str, trials: int = 1000, seed: int = 0, tol: float | None = None) -> InvariantReport:
    """Run one invariant; ``worst_seed`` is the trial index with the smallest slack."""
    inv = INVARIANTS[name]
    worst, worst_trial = math.inf, 0
    for trial in range(trials):
        slack = inv.check(stream(seed, "invariant", name, trial))
        if slack < worst:
            worst, worst_trial = slack, trial
    return InvariantReport(name, trials, -worst, worst_trial, inv.tol if tol is None else tol)


def run_invariant_suite(
    trials: int = 1000, seed: int = 0, names: list[str] | None = None, tol: float | None = None
) -> list[InvariantReport]:
    return [run_invariant(n, trials, seed, tol) for n in (names or list(INVARIANTS))]
