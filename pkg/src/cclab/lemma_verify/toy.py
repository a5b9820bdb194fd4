"""Toy quantum protocols: alternating control-isometries on small registers.

Alice holds ``A``, Bob holds ``B`` and the message register ``C`` travels
between them. An odd step is Alice's isometry on ``(A, C)`` controlled by the
classical input register ``X``; an even step is Bob's on ``(B, C)`` controlled
by ``Y``. Before the first step ``C`` is trivial (dimension 1) and ``(A, B)``
hold a pre-shared pure state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, SizeError, StateError
from ..qmath.measures import conditional_mutual_information
from ..qmath.prob import ProbTable
from ..qmath.registers import RegisterSystem, dim_cap
from ..qmath.sampling import as_generator, random_isometry, random_state
from ..qmath.states import (
    Isometry,
    PureState,
    apply_isometry,
    canonical_purification,
    controlled_isometry,
    tensor,
)

ISOMETRY_TOL = 1e-10
NORM_TOL = 1e-10
LOCAL = {"A": "A", "B": "B"}
CONTROL = {"A": "X", "B": "Y"}


@dataclass(frozen=True, eq=False)
class Step:
    """One party's move: ``blocks[v]`` maps (local, C) to (local', C') when the control reads ``v``."""

    party: str
    blocks: tuple[np.ndarray, ...]
    local_dim: int
    message_dim: int

    def __post_init__(self):
        if self.party not in LOCAL:
            raise DomainError(f"party must be 'A' or 'B', got {self.party!r}")
        blocks = tuple(np.asarray(b, dtype=complex) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if any(b.shape[0] != self.local_dim * self.message_dim for b in blocks):
            raise StateError("block output dimension does not match local_dim * message_dim")

    def isometry(self) -> Isometry:
        control = CONTROL[self.party]
        return controlled_isometry(
            (control, len(self.blocks)),
            (LOCAL[self.party], "C"),
            ((LOCAL[self.party], self.local_dim), ("C", self.message_dim)),
            self.blocks,
        )


@dataclass(frozen=True, eq=False)
class ToyQuantumProtocol:
    dx: int
    dy: int
    pre_shared: PureState
    steps: tuple[Step, ...]

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if sorted(self.pre_shared.names) != ["A", "B"]:
            raise StateError("pre-shared state must live on registers A and B")
        object.__setattr__(self, "pre_shared", self.pre_shared.reorder(("A", "B")))
        if not self.steps:
            raise DomainError("a protocol needs at least one step")
        da, db = self.pre_shared.system.dims
        dc = 1
        for i, step in enumerate(self.steps, start=1):
            expected = "A" if i % 2 else "B"
            if step.party != expected:
                raise DomainError(f"step {i} belongs to {expected}, got {step.party}")
            d_control = self.dx if step.party == "A" else self.dy
            if len(step.blocks) != d_control:
                raise DomainError(f"step {i} needs {d_control} blocks, got {len(step.blocks)}")
            d_local = da if step.party == "A" else db
            if any(b.shape[1] != d_local * dc for b in step.blocks):
                raise StateError(f"step {i} block input dimension does not match registers")
            defect = step.isometry().defect()
            if defect > ISOMETRY_TOL:
                raise StateError(f"step {i} is not an isometry (defect {defect:.2e})")
            if step.party == "A":
                da = step.local_dim
            else:
                db = step.local_dim
            dc = step.message_dim
            total = (self.dx * self.dy) ** 2 * da * db * dc
            if total > dim_cap():
                raise SizeError(f"round {i} state dimension {total} exceeds cap {dim_cap()}", estimated=total)

    @property
    def rounds(self) -> int:
        return len(self.steps)

    def message_dims(self) -> list[int]:
        return [s.message_dim for s in self.steps]

    def initial_state(self, inputs: ProbTable) -> PureState:
        """``|rho>_{X R_X Y R_Y} (x) |pre>_{AB} (x) |0>_C`` with a trivial ``C``."""
        self._check_inputs(inputs)
        pur = canonical_purification(inputs.marginal(["X", "Y"]))
        c0 = PureState._trusted(RegisterSystem.of(C=1), np.ones(1, dtype=complex))
        return tensor(tensor(pur, self.pre_shared), c0)

    def states(self, inputs: ProbTable) -> list[PureState]:
        """Global pure states before the first step and after every step."""
        out = [self.initial_state(inputs)]
        for i, step in enumerate(self.steps, start=1):
            nxt = apply_isometry(out[-1], step.isometry())
            norm = float(np.linalg.norm(nxt.amplitudes))
            if abs(norm - 1.0) > NORM_TOL:
                raise StateError(f"round {i} lost norm: {norm}")
            out.append(nxt)
        return out

    def _check_inputs(self, inputs: ProbTable) -> None:
        if {"X", "Y"} - set(inputs.names):
            raise DomainError("input table needs variables X and Y")
        if len(inputs.support_of("X")) != self.dx or len(inputs.support_of("Y")) != self.dy:
            raise DomainError("input supports do not match the protocol's input dimensions")


def _random_step(party: str, n_blocks: int, d_in: int, d_local: int, d_c: int, rng, oblivious: bool) -> Step:
    if oblivious:
        w = random_isometry(d_in, d_local * d_c, rng)
        blocks = tuple(w for _ in range(n_blocks))
    else:
        blocks = tuple(random_isometry(d_in, d_local * d_c, rng) for _ in range(n_blocks))
    return Step(party, blocks, d_local, d_c)


def random_toy_protocol(
    rounds: int = 3,
    seed: int | np.random.Generator = 0,
    dx: int = 2,
    dy: int = 2,
    da: int = 2,
    db: int = 2,
    dc: int = 2,
    entangled: bool = True,
    oblivious: bool = False,
) -> ToyQuantumProtocol:
    """Random control-isometries, Haar per block; ``oblivious`` ignores the inputs."""
    rng = as_generator(seed, "toy_protocol", rounds)
    ab = RegisterSystem.of(A=da, B=db)
    pre = random_state(ab, "pure", seed=rng) if entangled else PureState.basis(ab, 0)
    steps, c = [], 1
    for i in range(1, rounds + 1):
        if i % 2:
            steps.append(_random_step("A", dx, da * c, da, dc, rng, oblivious))
        else:
            steps.append(_random_step("B", dy, db * c, db, dc, rng, oblivious))
        c = dc
    return ToyQuantumProtocol(dx, dy, pre, tuple(steps))


def _interleave(w1: np.ndarray, d1: tuple[int, int, int, int], w2: np.ndarray, d2: tuple[int, int, int, int]):
    """Tensor two (local, C) maps and regroup as (local1 local2, C1 C2)."""
    lo1, co1, li1, ci1 = d1
    lo2, co2, li2, ci2 = d2
    t = np.einsum(
        "abcd,efgh->aebfcgdh",
        w1.reshape(lo1, co1, li1, ci1),
        w2.reshape(lo2, co2, li2, ci2),
    )
    return t.reshape(lo1 * lo2 * co1 * co2, li1 * li2 * ci1 * ci2)


def kron_protocols(p: ToyQuantumProtocol, q: ToyQuantumProtocol) -> ToyQuantumProtocol:
    """Run two protocols side by side; inputs are indexed ``x = x_p * dx_q + x_q``."""
    if p.rounds != q.rounds:
        raise DomainError("protocols must have the same number of rounds")
    pa, pb = p.pre_shared.system.dims
    qa, qb = q.pre_shared.system.dims
    pre_amp = np.einsum(
        "ab,cd->acbd", p.pre_shared.amplitudes.reshape(pa, pb), q.pre_shared.amplitudes.reshape(qa, qb)
    )
    pre = PureState._trusted(RegisterSystem.of(A=pa * qa, B=pb * qb), pre_amp.reshape(-1))
    local = {"A": [pa, qa], "B": [pb, qb]}
    c_in = [1, 1]
    steps = []
    for sp, sq in zip(p.steps, q.steps):
        li = local[sp.party]
        dp = (sp.local_dim, sp.message_dim, li[0], c_in[0])
        dq = (sq.local_dim, sq.message_dim, li[1], c_in[1])
        blocks = tuple(_interleave(bp, dp, bq, dq) for bp in sp.blocks for bq in sq.blocks)
        steps.append(Step(sp.party, blocks, sp.local_dim * sq.local_dim, sp.message_dim * sq.message_dim))
        local[sp.party] = [sp.local_dim, sq.local_dim]
        c_in = [sp.message_dim, sq.message_dim]
    return ToyQuantumProtocol(p.dx * q.dx, p.dy * q.dy, pre, tuple(steps))


def kron_inputs(p: ProbTable, q: ProbTable) -> ProbTable:
    """Input table for :func:`kron_protocols` from the two separate input tables."""
    dxq, dyq = len(q.support_of("X")), len(q.support_of("Y"))
    atoms: dict[tuple[int, int], float] = {}
    for (x1, y1), w1 in p.marginal(["X", "Y"]).items():
        for (x2, y2), w2 in q.marginal(["X", "Y"]).items():
            key = (x1 * dxq + x2, y1 * dyq + y2)
            atoms[key] = atoms.get(key, 0.0) + w1 * w2
    supports = [
        tuple(range(len(p.support_of("X")) * dxq)),
        tuple(range(len(p.support_of("Y")) * dyq)),
    ]
    return ProbTable.from_atoms(("X", "Y"), atoms, supports=supports)


def qic_of(protocol: ToyQuantumProtocol, inputs: ProbTable) -> tuple[float, int]:
    """Quantum information cost and communication cost (whole qubits per message).

    Round ``i`` contributes ``I(C; R_X R_Y | B)`` when Alice just spoke and
    ``I(C; R_X R_Y | A)`` when Bob did, evaluated on the global pure state.
    """
    states = protocol.states(inputs)
    qic = 0.0
    for i, state in enumerate(states[1:], start=1):
        other = "B" if i % 2 else "A"
        qic += conditional_mutual_information(state, "C", ("R_X", "R_Y"), other)
    qcc = sum(math.ceil(math.log2(d)) for d in protocol.message_dims())
    return qic, qcc


def uniform_inputs(dx: int = 2, dy: int = 2) -> ProbTable:
    return ProbTable.uniform([("X", tuple(range(dx))), ("Y", tuple(range(dy)))])


def equal_inputs(d: int = 2) -> ProbTable:
    """``X = Y`` uniform: correlated, with the same marginals as :func:`uniform_inputs`."""
    return ProbTable.from_atoms(
        ("X", "Y"), {(v, v): 1.0 / d for v in range(d)}, supports=[tuple(range(d))] * 2
    )


def verify_qic(protocols: int = 100, seed: int = 0, tol: float = 1e-8):
    """``qic <= 2 qcc`` on random protocols and ``qic = 0`` on input-oblivious ones."""
    from ..rng import stream
    from .report import collect

    inputs = uniform_inputs()

    def slacks():
        for t in range(protocols):
            rng = stream(seed, "qic", t)
            rounds = int(rng.integers(1, 5))
            qic, qcc = qic_of(random_toy_protocol(rounds, seed=rng), inputs)
            yield 2 * qcc - qic
            qic0, _ = qic_of(random_toy_protocol(rounds, seed=rng, oblivious=True), inputs)
            yield -abs(qic0)

    return collect("qic_sanity", slacks(), tol)
