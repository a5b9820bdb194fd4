"""Random states, isometries and channels, all driven by explicit generators."""

from __future__ import annotations

from typing import Literal

import numpy as np

from ..errors import DomainError
from ..rng import stream
from .registers import RegisterSystem
from .states import DensityMatrix, Isometry, PureState, State, apply_isometry, marginal

Seed = int | np.random.Generator


def as_generator(seed: Seed, *keys) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(int(seed), *keys)


def _gaussian(rng: np.random.Generator, *shape: int) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_state(
    system: RegisterSystem,
    kind: Literal["pure", "mixed"] = "pure",
    rank: int | None = None,
    seed: Seed = 0,
) -> State:
    """Unitarily invariant random state.

    ``pure`` draws a uniform unit vector. ``mixed`` traces out a ``rank``
    dimensional ancilla from a uniform pure state on system (x) ancilla, which
    is ``G G^dagger / Tr`` for a ``dim x rank`` complex Gaussian ``G``.
    """
    rng = as_generator(seed, "random_state", system.dim, kind, rank)
    d = system.dim
    if kind == "pure":
        v = _gaussian(rng, d)
        return PureState._trusted(system, v / np.linalg.norm(v))
    if kind != "mixed":
        raise DomainError(f"unknown state kind {kind!r}")
    rank = d if rank is None else int(rank)
    if not 1 <= rank <= d:
        raise DomainError(f"rank {rank} outside 1..{d}")
    g = _gaussian(rng, d, rank)
    m = g @ g.conj().T
    return DensityMatrix._trusted(system, m / np.trace(m).real)


def random_isometry(d_in: int, d_out: int, seed: Seed = 0) -> np.ndarray:
    """``d_out x d_in`` matrix with orthonormal columns, Haar distributed."""
    if d_out < d_in:
        raise DomainError(f"no isometry from dimension {d_in} to {d_out}")
    rng = as_generator(seed, "random_isometry", d_in, d_out)
    q, r = np.linalg.qr(_gaussian(rng, d_out, d_in))
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_unitary(d: int, seed: Seed = 0) -> np.ndarray:
    return random_isometry(d, d, seed)


def random_channel(
    state: State,
    inputs: tuple[str, ...],
    outputs: tuple[tuple[str, int], ...],
    env_dim: int,
    seed: Seed = 0,
    env_name: str = "_env",
) -> DensityMatrix:
    """Apply a random Stinespring channel ``inputs -> outputs`` and discard its environment."""
    d_in = state.system.dim_of(inputs)
    d_out = int(np.prod([d for _, d in outputs])) * env_dim
    u = random_isometry(d_in, d_out, seed)
    iso = Isometry(inputs, tuple(outputs) + ((env_name, env_dim),), u)
    out = apply_isometry(state, iso)
    return marginal(out, out.system.complement((env_name,)))


def random_probs(n: int, seed: Seed = 0, concentration: float = 1.0) -> np.ndarray:
    """Dirichlet-distributed probability vector."""
    rng = as_generator(seed, "random_probs", n)
    return rng.dirichlet(np.full(n, concentration))
