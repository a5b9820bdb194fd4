"""Decoupling: small I(A;C) lets an isometry on B split it into separate purifiers of A and C."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..qmath.measures import hellinger, mutual_information
from ..qmath.registers import RegisterSystem
from ..qmath.sampling import random_state
from ..qmath.states import Isometry, PureState, apply_isometry, merge_registers, purify, tensor
from ..qmath.uhlmann import uhlmann_isometry
from ..rng import stream
from .report import LemmaReport, run_trials

DECOUPLING_TOL = 1e-8
MAX_INFORMATION = 0.5
MAX_ETA = 0.15


@dataclass(frozen=True, eq=False)
class DecouplingResult:
    information: float
    overlap: float
    hellinger: float
    isometry: Isometry

    def slack(self) -> float:
        return min(self.overlap - (1 - self.information), math.sqrt(max(self.information, 0.0)) - self.hellinger)


def decouple(psi: PureState, b1: int, b2: int, max_information: float | None = MAX_INFORMATION) -> DecouplingResult:
    """Build ``U: B -> B1 B2`` for a pure state on ``(A, B, C)``.

    ``B1`` purifies ``psi_A`` and ``B2`` purifies ``psi_C``; both need at
    least the dimension of what they purify.
    """
    if sorted(psi.names) != ["A", "B", "C"]:
        raise DomainError("state must live on registers A, B, C")
    info = mutual_information(psi, "A", "C")
    if max_information is not None and info > max_information:
        raise DomainError(f"I(A;C) = {info:.4f} exceeds {max_information}")
    da, dc = psi.system.dim_of(("A",)), psi.system.dim_of(("C",))
    if b1 < da or b2 < dc:
        raise DomainError("B1 and B2 must be at least as large as A and C")
    psi_1 = _pad(purify(psi.marginal(("A",)), {"A": "B1"}), "B1", b1)
    psi_2 = _pad(purify(psi.marginal(("C",)), {"C": "B2"}), "B2", b2)
    target = tensor(psi_1, psi_2)
    rho = target.marginal(("A", "C"))
    iso, overlap = uhlmann_isometry(rho, psi.marginal(("A", "C")), target, psi)
    moved = apply_isometry(psi, iso)
    return DecouplingResult(info, abs(target.overlap(moved)), hellinger(moved, target), iso)


def _pad(state: PureState, name: str, dim: int) -> PureState:
    d = state.system.dim_of((name,))
    if d == dim:
        return state
    embed = Isometry((name,), ((name, dim),), np.eye(dim, d))
    return apply_isometry(state, embed)


def near_product_state(rng, eta: float, da: int = 2, b1: int = 2, b2: int = 2, dc: int = 2) -> PureState:
    """``sqrt(1-eta) |phi>_{A B1} |chi>_{B2 C} + sqrt(eta) |corr>`` with ``corr`` orthogonal to the product."""
    phi = random_state(RegisterSystem.of(A=da, B1=b1), "pure", seed=rng)
    chi = random_state(RegisterSystem.of(B2=b2, C=dc), "pure", seed=rng)
    prod = tensor(phi, chi)
    corr = random_state(prod.system, "pure", seed=rng).amplitudes
    corr = corr - np.vdot(prod.amplitudes, corr) * prod.amplitudes
    corr /= np.linalg.norm(corr)
    amps = math.sqrt(1 - eta) * prod.amplitudes + math.sqrt(eta) * corr
    state = PureState._trusted(prod.system, amps / np.linalg.norm(amps))
    return merge_registers(state, {"B": ("B1", "B2")})


def random_instance(seed: int, trial: int, dims=(2, 2, 2, 2), attempts: int = 100) -> PureState:
    """First near-product state in the trial's stream with ``I(A;C) <= 0.5``."""
    rng = stream(seed, "decoupling", trial)
    da, b1, b2, dc = dims
    for _ in range(attempts):
        psi = near_product_state(rng, rng.uniform(0, MAX_ETA), da, b1, b2, dc)
        if mutual_information(psi, "A", "C") <= MAX_INFORMATION:
            return psi
    raise DomainError("no instance within the information budget")


def verify_decoupling(trials: int = 200, seed: int = 0, dims=(2, 2, 2, 2), tol: float = DECOUPLING_TOL) -> LemmaReport:
    """``dims = (A, B1, B2, C)``; ``B`` has dimension ``B1 * B2``."""
    _, b1, b2, _ = dims

    def check(t: int) -> float:
        return decouple(random_instance(seed, t, dims), b1, b2).slack()

    return run_trials("decoupling", check, trials, tol)
