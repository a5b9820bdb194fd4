"""Distributional cut-and-paste on toy protocols.

On a product input ``rho`` each round's state is close (by ``eps_i``) to one
in which the speaker's reference register is decoupled. Controlled Uhlmann
maps ``V^i`` witness this closeness; composing two consecutive maps sends the
round-``i`` state of *any* input ``sigma`` with the same marginals close to
``sigma``'s purification tensored with a fresh copy of ``rho``'s run. The
verifier computes every quantity exactly and checks the recursion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError
from ..qmath.measures import hellinger, hellinger_squared
from ..qmath.prob import ProbTable
from ..qmath.states import Isometry, PureState, apply_isometry, canonical_purification, tensor
from ..qmath.uhlmann import uhlmann_isometry
from ..rng import stream
from .toy import ToyQuantumProtocol

CUT_PASTE_TOL = 1e-8
PRODUCT_TOL = 1e-12


def tilde(name: str, i: int) -> str:
    """Fresh copy of register ``name`` introduced by the round-``i`` map."""
    return f"{name}~{i}"


@dataclass(frozen=True, eq=False)
class CutPasteTrace:
    """Per-round quantities; index ``i`` of each list is round ``i`` (round 0 included)."""

    eps: list[float]
    eps_mixture: list[float]
    gamma: list[float | None]
    delta: list[float | None]
    isometries: list[Isometry] = field(repr=False)

    @property
    def rounds(self) -> int:
        return len(self.eps) - 1

    def bound(self, i: int) -> float:
        """``eps_i + eps_{i-1} + 2 sum_{j <= i-2} eps_j``."""
        e = self.eps
        return e[i] + e[i - 1] + 2 * sum(e[1:i - 1])

    def slacks(self) -> list[float]:
        """One slack per checked relation; negative means violated."""
        out = [-abs(self.gamma[1] - self.eps[1]), -abs(self.delta[1] - self.eps[1])]
        for i in range(2, self.rounds + 1):
            b = self.bound(i)
            out += [b - self.gamma[i], b - self.delta[i]]
        out += [-abs(a - b) for a, b in zip(self.eps[1:], self.eps_mixture[1:])]
        return out

    def min_slack(self) -> float:
        return min(self.slacks())

    def to_json(self) -> dict:
        return {
            "eps": self.eps,
            "eps_mixture": self.eps_mixture,
            "gamma": self.gamma,
            "delta": self.delta,
            "min_slack": self.min_slack(),
        }


def _check_inputs(rho: ProbTable, sigma: ProbTable) -> None:
    rx, ry = rho.marginal(["X"]), rho.marginal(["Y"])
    if rho.marginal(["X", "Y"]).max_abs_diff(rx.product(ry)) > PRODUCT_TOL:
        raise DomainError("rho must be a product distribution")
    if sigma.marginal(["X"]).max_abs_diff(rx) > PRODUCT_TOL or sigma.marginal(["Y"]).max_abs_diff(ry) > PRODUCT_TOL:
        raise DomainError("sigma's marginals on X and Y must equal rho's")


def _speaker(i: int) -> tuple[str, str, str]:
    """(input register, local register, other local register) of round ``i``'s speaker."""
    return ("X", "A", "B") if i % 2 else ("Y", "B", "A")


def _eps_direct(state: PureState, i: int) -> float:
    v, local, other = _speaker(i)
    ref, o = "R_" + v, "Y" if v == "X" else "X"
    rest = (o, "R_" + o, other, "C")
    joint = state.marginal((ref,) + rest)
    return hellinger(joint, tensor(state.marginal((ref,)), state.marginal(rest)))


def _eps_mixture(state: PureState, i: int) -> float:
    """Same distance through the classical decomposition over the reference register."""
    v, local, other = _speaker(i)
    ref, o = "R_" + v, "Y" if v == "X" else "X"
    rest = (o, "R_" + o, other, "C")
    avg = state.marginal(rest)
    h2 = 0.0
    for value in range(state.system.dim_of((ref,))):
        p, branch = state.project(ref, value)
        if p > 0:
            h2 += p * hellinger_squared(branch.marginal(rest), avg)
    return math.sqrt(max(h2, 0.0))


def _v_zero(y_pur: PureState, db: int) -> Isometry:
    """Rename ``B`` to its round-0 copy and create ``rho_Y``'s purification from nothing."""
    col = y_pur.reorder(("Y", "R_Y")).amplitudes.reshape(-1, 1)
    d_y = y_pur.system.dim_of(("Y",))
    m = np.kron(np.eye(db), col)
    return Isometry(("B",), ((tilde("B", 0), db), (tilde("Y", 0), d_y), (tilde("R_Y", 0), d_y)), m)


def _v_round(state: PureState, pur: PureState, i: int) -> tuple[Isometry, float]:
    v, local, _ = _speaker(i)
    ref = "R_" + v
    target = tensor(pur, state.rename({v: tilde(v, i), ref: tilde(ref, i), local: tilde(local, i)}))
    primary = state.system.complement((v, local))
    iso, overlap = uhlmann_isometry(
        target.marginal(primary), state.marginal(primary), target, state, control=v
    )
    return iso, overlap


def _relabel(i: int) -> dict[str, str]:
    """Tilde names carried by ``V^i V^{i-1}`` at round ``i``."""
    if i % 2:
        xi, yi = i, i - 1
    else:
        xi, yi = i - 1, i
    a_i, b_i = (i, i - 1) if i % 2 else (i - 1, i)
    return {
        "X": tilde("X", xi),
        "R_X": tilde("R_X", xi),
        "Y": tilde("Y", yi),
        "R_Y": tilde("R_Y", yi),
        "A": tilde("A", a_i),
        "B": tilde("B", b_i),
    }


def _pasted_distance(state: PureState, v_prev: Isometry, v_cur: Isometry, input_pur: PureState, run: PureState, i: int):
    moved = apply_isometry(apply_isometry(state, v_prev), v_cur)
    return hellinger(moved, tensor(input_pur, run.rename(_relabel(i))))


def cut_and_paste_trace(protocol: ToyQuantumProtocol, rho: ProbTable, sigma: ProbTable) -> CutPasteTrace:
    """All of ``eps_i``, ``gamma_i`` and ``delta_i`` for one protocol and input pair."""
    if protocol.rounds < 2:
        raise DomainError("cut-and-paste needs a protocol with at least two rounds")
    _check_inputs(rho, sigma)
    rho_states = protocol.states(rho)
    sigma_states = protocol.states(sigma)
    x_pur = canonical_purification(rho.marginal(["X"]))
    y_pur = canonical_purification(rho.marginal(["Y"]))
    rho_pur = canonical_purification(rho.marginal(["X", "Y"]))
    sigma_pur = canonical_purification(sigma.marginal(["X", "Y"]))

    db = protocol.pre_shared.system.dim_of(("B",))
    isos = [_v_zero(y_pur, db)]
    eps, eps_mix = [0.0], [0.0]
    gamma: list[float | None] = [None]
    delta: list[float | None] = [None]
    for i in range(1, protocol.rounds + 1):
        state = rho_states[i]
        iso, overlap = _v_round(state, x_pur if i % 2 else y_pur, i)
        isos.append(iso)
        eps.append(_eps_direct(state, i))
        eps_mix.append(_eps_mixture(state, i))
        gamma.append(_pasted_distance(state, isos[i - 1], iso, rho_pur, state, i))
        delta.append(_pasted_distance(sigma_states[i], isos[i - 1], iso, sigma_pur, state, i))
    return CutPasteTrace(eps, eps_mix, gamma, delta, isos)


def verify_cut_and_paste(
    protocol: ToyQuantumProtocol,
    rho: ProbTable,
    sigma: ProbTable,
    tol: float = CUT_PASTE_TOL,
) -> tuple[CutPasteTrace, bool]:
    trace = cut_and_paste_trace(protocol, rho, sigma)
    return trace, trace.min_slack() >= -tol


def verify_cut_and_paste_suite(protocols: int = 50, seed: int = 0, rounds: int = 3, tol: float = CUT_PASTE_TOL):
    """Random ``rounds``-round protocols on uniform bits against the equal-bits input."""
    from .report import collect
    from .toy import equal_inputs, random_toy_protocol, uniform_inputs

    rho, sigma = uniform_inputs(), equal_inputs()

    def slacks():
        for t in range(protocols):
            p = random_toy_protocol(rounds, seed=stream(seed, "cut_and_paste", t))
            yield cut_and_paste_trace(p, rho, sigma).min_slack()

    return collect("cut_and_paste", slacks(), tol)
