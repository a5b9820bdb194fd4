"""Distances and entropies on quantum states.

Conventions: logarithms are base 2; trace distance is the unnormalised
``||rho - sigma||_1`` in ``[0, 2]``; fidelity is ``||sqrt(rho) sqrt(sigma)||_1``
(not squared). Eigenvalues within ``1e-12`` of zero are treated as zero and
matrices are Hermitized before any spectral decomposition.
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from ..errors import RegisterError
from .states import DensityMatrix, PureState, State, _permute_vector, as_density, marginal

EIG_CLIP = 1e-12
SUPPORT_TOL = 1e-9


def hermitize(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def spectrum(m: np.ndarray) -> np.ndarray:
    """Clipped eigenvalues of a (nearly) Hermitian PSD matrix."""
    lam = np.linalg.eigvalsh(hermitize(m))
    lam[np.abs(lam) <= EIG_CLIP] = 0.0
    return lam


def sqrt_psd(m: np.ndarray) -> np.ndarray:
    lam, vec = np.linalg.eigh(hermitize(m))
    lam = np.where(lam <= EIG_CLIP, 0.0, lam)
    return (vec * np.sqrt(lam)) @ vec.conj().T


def _names(group) -> tuple[str, ...]:
    if isinstance(group, str):
        return (group,)
    return tuple(group)


def _aligned(rho: State, sigma: State) -> State:
    """``sigma`` reordered to ``rho``'s register order; rejects different systems."""
    if sorted(rho.names) != sorted(sigma.names):
        raise RegisterError(f"states live on different systems: {rho.names} vs {sigma.names}")
    out = sigma.reorder(rho.names)
    if out.system != rho.system:
        raise RegisterError("register dimensions differ between states")
    return out


def _entropy_of_values(lam: np.ndarray) -> float:
    lam = lam[lam > EIG_CLIP]
    return float(max(-np.sum(lam * np.log2(lam)), 0.0))


def fidelity(rho: State, sigma: State) -> float:
    sigma = _aligned(rho, sigma)
    if isinstance(rho, PureState) and isinstance(sigma, PureState):
        f = abs(np.vdot(rho.amplitudes, sigma.amplitudes))
    elif isinstance(rho, PureState) or isinstance(sigma, PureState):
        psi, other = (rho, sigma) if isinstance(rho, PureState) else (sigma, rho)
        v = psi.amplitudes
        f = math.sqrt(max(float(np.vdot(v, other.matrix @ v).real), 0.0))
    else:
        prod = sqrt_psd(rho.matrix) @ sqrt_psd(sigma.matrix)
        f = float(np.sum(np.linalg.svd(prod, compute_uv=False)))
    return float(min(max(f, 0.0), 1.0))


def hellinger_squared(rho: State, sigma: State) -> float:
    """``1 - F`` computed as half a squared distance between optimally aligned purifications.

    Evaluating ``1 - F`` directly cancels catastrophically for nearly equal
    states; ``min_U ||sqrt(rho) - sqrt(sigma) U||_2^2 / 2`` is the same number
    without the cancellation.
    """
    sigma = _aligned(rho, sigma)
    if isinstance(rho, PureState) and isinstance(sigma, PureState):
        a, b = rho.amplitudes, sigma.amplitudes
        ov = np.vdot(a, b)
        if abs(ov) == 0:
            return 1.0
        diff = a - b * (np.conj(ov) / abs(ov))
        return float(min(0.5 * np.vdot(diff, diff).real, 1.0))
    m_r = sqrt_psd(as_density(rho).matrix)
    m_s = sqrt_psd(as_density(sigma).matrix)
    w, _, vh = np.linalg.svd(m_r.conj().T @ m_s)
    diff = m_r - m_s @ (vh.conj().T @ w.conj().T)
    return float(min(0.5 * np.sum(np.abs(diff) ** 2), 1.0))


def hellinger(rho: State, sigma: State) -> float:
    return math.sqrt(max(hellinger_squared(rho, sigma), 0.0))


def trace_distance(rho: State, sigma: State) -> float:
    """``||rho - sigma||_1``, between 0 and 2."""
    sigma = _aligned(rho, sigma)
    diff = as_density(rho).matrix - as_density(sigma).matrix
    return float(np.sum(np.abs(np.linalg.eigvalsh(hermitize(diff)))))


def vn_entropy(state: State, part: Iterable[str] | str | None = None) -> float:
    """Entropy in bits of the marginal on ``part`` (whole system by default)."""
    system = state.system
    part = system.names if part is None else system.ordered(_names(part))
    if not part:
        return 0.0
    if isinstance(state, PureState):
        if len(part) == len(system):
            return 0.0
        rest = system.complement(part)
        m = _permute_vector(state.amplitudes, system, part + rest).reshape(system.dim_of(part), -1)
        s = np.linalg.svd(m, compute_uv=False)
        return _entropy_of_values(s**2)
    return _entropy_of_values(spectrum(marginal(state, part).matrix))


def relative_entropy(rho: State, sigma: State) -> float:
    """``D(rho || sigma)`` in bits; ``math.inf`` when ``rho`` leaks off ``supp(sigma)``."""
    sigma = _aligned(rho, sigma)
    r = as_density(rho).matrix
    lam, vec = np.linalg.eigh(hermitize(as_density(sigma).matrix))
    on = lam > EIG_CLIP
    # diagonal of rho in sigma's eigenbasis
    weights = np.real(np.einsum("ji,jk,ki->i", vec.conj(), r, vec))
    leak = float(np.sum(weights[~on]))
    if leak > SUPPORT_TOL:
        return math.inf
    cross = float(np.sum(weights[on] * np.log2(lam[on])))
    d = -_entropy_of_values(spectrum(r)) - cross
    return max(d, 0.0)


def _check_disjoint(*groups: tuple[str, ...]) -> None:
    seen: set[str] = set()
    for g in groups:
        if len(set(g)) != len(g) or seen & set(g):
            raise RegisterError(f"register groups overlap: {groups}")
        seen |= set(g)


def mutual_information(state: State, a, b) -> float:
    a, b = _names(a), _names(b)
    _check_disjoint(a, b)
    return vn_entropy(state, a) + vn_entropy(state, b) - vn_entropy(state, a + b)


def conditional_mutual_information(state: State, a, b, c) -> float:
    """``S(AC) + S(BC) - S(ABC) - S(C)``; works for quantum conditioning registers."""
    a, b, c = _names(a), _names(b), _names(c)
    _check_disjoint(a, b, c)
    if not c:
        return mutual_information(state, a, b)
    return (
        vn_entropy(state, a + c)
        + vn_entropy(state, b + c)
        - vn_entropy(state, a + b + c)
        - vn_entropy(state, c)
    )


def is_classical_on(rho: DensityMatrix, name: str, tol: float = 1e-10) -> bool:
    """True when ``rho`` is block-diagonal with respect to register ``name``."""
    system = rho.system
    rest = system.complement((name,))
    m = rho.reorder((name,) + rest).matrix
    d = system.dim_of((name,))
    blocks = m.reshape(d, m.shape[0] // d, d, m.shape[0] // d)
    off = blocks.copy()
    for i in range(d):
        off[i, :, i, :] = 0
    return float(np.max(np.abs(off), initial=0.0)) <= tol
