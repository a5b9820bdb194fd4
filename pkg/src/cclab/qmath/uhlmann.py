"""Constructive Uhlmann isometries between purifications."""

from __future__ import annotations

import numpy as np

from ..errors import DomainError, RegisterError, StateError
from .states import DensityMatrix, Isometry, PureState, _permute_vector, controlled_isometry

PURIFICATION_TOL = 1e-8


def _padding(dout: int, din: int) -> np.ndarray:
    return np.eye(dout, din, dtype=complex)


def _coefficients(psi: PureState, primary: tuple[str, ...], purifier: tuple[str, ...]) -> np.ndarray:
    v = _permute_vector(psi.amplitudes, psi.system, primary + purifier)
    return v.reshape(psi.system.dim_of(primary), -1)


def _block(m_rho: np.ndarray, m_sigma: np.ndarray) -> tuple[np.ndarray, float]:
    """Isometry ``U`` (target purifier <- source purifier) maximising the overlap.

    With ``K = M_rho^dagger M_sigma = W S V^dagger`` the overlap
    ``sum K[a, b] U[a, b]`` is maximised by ``U = conj(W) V^T``; its value is
    the trace norm of ``K``.
    """
    d_out, d_in = m_rho.shape[1], m_sigma.shape[1]
    k = m_rho.conj().T @ m_sigma
    if not np.any(k):
        return _padding(d_out, d_in), 0.0
    w, s, vh = np.linalg.svd(k, full_matrices=True)
    # vh is V^dagger, so V^T = conj(vh)
    u = w[:, :d_in].conj() @ vh.conj()
    return u, float(np.sum(s))


def _check_pure_marginal(pur: PureState, rho: DensityMatrix, label: str) -> None:
    marg = pur.marginal(rho.names).reorder(rho.names)
    if marg.system != rho.system or np.max(np.abs(marg.matrix - rho.matrix)) > PURIFICATION_TOL:
        raise StateError(f"{label} does not purify the given state")


def uhlmann_isometry(
    rho: DensityMatrix,
    sigma: DensityMatrix,
    pur_rho: PureState,
    pur_sigma: PureState,
    control: str | None = None,
) -> tuple[Isometry, float]:
    """Isometry on ``pur_sigma``'s purifier with ``<pur_rho| (1 (x) U) |pur_sigma> = F(rho, sigma)``.

    The returned isometry maps the purifying registers of ``pur_sigma`` onto
    the purifying registers of ``pur_rho`` (names and dimensions taken from
    ``pur_rho``). With ``control`` set, that register must sit in both
    purifiers; the map is then block diagonal in its basis, which is valid
    when both marginals are classical on a copy of it.
    """
    if sorted(rho.names) != sorted(sigma.names):
        raise RegisterError("rho and sigma must share their registers")
    primary = rho.names
    sigma = sigma.reorder(primary)
    _check_pure_marginal(pur_rho, rho, "pur_rho")
    _check_pure_marginal(pur_sigma, sigma, "pur_sigma")
    q_rho = pur_rho.system.complement(primary)
    q_sigma = pur_sigma.system.complement(primary)
    d_out, d_in = pur_rho.system.dim_of(q_rho), pur_sigma.system.dim_of(q_sigma)
    if d_out < d_in:
        raise DomainError(f"target purifier dimension {d_out} is smaller than source {d_in}")

    if control is None:
        u, overlap = _block(
            _coefficients(pur_rho, primary, q_rho), _coefficients(pur_sigma, primary, q_sigma)
        )
        iso = Isometry(q_sigma, tuple((n, pur_rho.system.dim_of((n,))) for n in q_rho), u)
        return iso, min(overlap, 1.0)

    if control not in q_rho or control not in q_sigma:
        raise RegisterError(f"control register {control!r} must belong to both purifiers")
    dc = pur_rho.system.dim_of((control,))
    if pur_sigma.system.dim_of((control,)) != dc:
        raise RegisterError("control register dimensions differ")
    rest_rho = tuple(n for n in q_rho if n != control)
    rest_sigma = tuple(n for n in q_sigma if n != control)
    m_r = _coefficients(pur_rho, (control,) + primary, rest_rho)
    m_s = _coefficients(pur_sigma, (control,) + primary, rest_sigma)
    rows = m_r.shape[0] // dc
    blocks, overlap = [], 0.0
    for x in range(dc):
        w, o = _block(m_r[x * rows:(x + 1) * rows], m_s[x * rows:(x + 1) * rows])
        blocks.append(w)
        overlap += o
    iso = controlled_isometry(
        (control, dc),
        rest_sigma,
        tuple((n, pur_rho.system.dim_of((n,))) for n in rest_rho),
        blocks,
    )
    return iso, min(overlap, 1.0)
