"""Density matrices, pure states and the structural operations on them.

Matrices are dense ``complex128`` numpy arrays laid out in the basis order of
their :class:`RegisterSystem`. All state objects are immutable; operations
return new objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from ..errors import RegisterError, StateError
from .prob import ProbTable
from .registers import RegisterSystem

STATE_TOL = 1e-9


def _permute_vector(vec: np.ndarray, system: RegisterSystem, order: Sequence[str]) -> np.ndarray:
    if tuple(order) == system.names:
        return vec
    perm = [system.index(n) for n in order]
    return vec.reshape(system.dims).transpose(perm).reshape(-1)


def _permute_matrix(mat: np.ndarray, system: RegisterSystem, order: Sequence[str]) -> np.ndarray:
    if tuple(order) == system.names:
        return mat
    k = len(system)
    perm = [system.index(n) for n in order]
    t = mat.reshape(system.dims * 2).transpose(perm + [p + k for p in perm])
    d = system.dim
    return t.reshape(d, d)


def _ensure_full(system: RegisterSystem, order: Sequence[str]) -> tuple[str, ...]:
    order = tuple(order)
    if sorted(order) != sorted(system.names):
        raise RegisterError(f"reorder needs a permutation of {system.names}, got {order}")
    return order


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Positive semidefinite, unit-trace matrix over a register system."""

    system: RegisterSystem
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = self.system.dim
        if m.shape != (d, d):
            raise StateError(f"matrix shape {m.shape} does not match system dimension {d}")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > STATE_TOL:
            raise StateError("matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > STATE_TOL:
            raise StateError(f"trace {np.trace(m).real!r} is not 1")
        if np.linalg.eigvalsh((m + m.conj().T) / 2)[0] < -STATE_TOL:
            raise StateError("matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def _trusted(cls, system: RegisterSystem, matrix: np.ndarray) -> "DensityMatrix":
        obj = object.__new__(cls)
        object.__setattr__(obj, "system", system)
        object.__setattr__(obj, "matrix", matrix)
        return obj

    @classmethod
    def maximally_mixed(cls, system: RegisterSystem) -> "DensityMatrix":
        return cls(system, np.eye(system.dim, dtype=complex) / system.dim)

    @classmethod
    def basis(cls, system: RegisterSystem, index: int | Sequence[int]) -> "DensityMatrix":
        return PureState.basis(system, index).density()

    @classmethod
    def diagonal(cls, system: RegisterSystem, probs: Sequence[float]) -> "DensityMatrix":
        return cls(system, np.diag(np.asarray(probs, dtype=complex)))

    @property
    def names(self) -> tuple[str, ...]:
        return self.system.names

    def reorder(self, order: Sequence[str]) -> "DensityMatrix":
        order = _ensure_full(self.system, order)
        return DensityMatrix._trusted(
            self.system.select(order), _permute_matrix(self.matrix, self.system, order)
        )

    def rename(self, mapping: dict[str, str]) -> "DensityMatrix":
        return DensityMatrix._trusted(self.system.rename(mapping), self.matrix)

    def partial_trace(self, keep: Iterable[str]) -> "DensityMatrix":
        return partial_trace(self, keep)

    def is_pure(self, tol: float = 1e-9) -> bool:
        return abs(np.trace(self.matrix @ self.matrix).real - 1.0) < tol

    def to_json(self) -> dict:
        return {"registers": self.system.to_json(), "entries": matrix_to_json(self.matrix)}

    @classmethod
    def from_json(cls, data: dict) -> "DensityMatrix":
        return cls(RegisterSystem.from_json(data["registers"]), matrix_from_json(data["entries"]))


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit vector over a register system."""

    system: RegisterSystem
    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if v.shape != (self.system.dim,):
            raise StateError(f"vector length {v.size} does not match dimension {self.system.dim}")
        if abs(np.linalg.norm(v) - 1.0) > STATE_TOL:
            raise StateError(f"vector norm {np.linalg.norm(v)!r} is not 1")
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    @classmethod
    def _trusted(cls, system: RegisterSystem, amplitudes: np.ndarray) -> "PureState":
        obj = object.__new__(cls)
        object.__setattr__(obj, "system", system)
        object.__setattr__(obj, "amplitudes", amplitudes)
        return obj

    @classmethod
    def basis(cls, system: RegisterSystem, index: int | Sequence[int]) -> "PureState":
        if not isinstance(index, (int, np.integer)):
            index = int(np.ravel_multi_index(tuple(index), system.dims))
        v = np.zeros(system.dim, dtype=complex)
        v[index] = 1.0
        return cls(system, v)

    @property
    def names(self) -> tuple[str, ...]:
        return self.system.names

    def density(self) -> DensityMatrix:
        v = self.amplitudes
        return DensityMatrix._trusted(self.system, np.outer(v, v.conj()))

    def reorder(self, order: Sequence[str]) -> "PureState":
        order = _ensure_full(self.system, order)
        return PureState._trusted(
            self.system.select(order), _permute_vector(self.amplitudes, self.system, order)
        )

    def rename(self, mapping: dict[str, str]) -> "PureState":
        return PureState._trusted(self.system.rename(mapping), self.amplitudes)

    def marginal(self, keep: Iterable[str]) -> DensityMatrix:
        """Reduced state on ``keep`` (in system order), computed as ``M M^dagger``."""
        keep = self.system.ordered(keep)
        rest = self.system.complement(keep)
        m = _permute_vector(self.amplitudes, self.system, keep + rest)
        m = m.reshape(self.system.dim_of(keep), -1)
        return DensityMatrix._trusted(self.system.select(keep), m @ m.conj().T)

    def overlap(self, other: "PureState") -> complex:
        """``<self|other>`` after aligning register order by name."""
        if sorted(self.names) != sorted(other.names):
            raise RegisterError(f"overlap needs identical registers: {self.names} vs {other.names}")
        o = other.reorder(self.names)
        if o.system != self.system:
            raise RegisterError("register dimensions differ")
        return complex(np.vdot(self.amplitudes, o.amplitudes))

    def project(self, name: str, value: int) -> tuple[float, "PureState | None"]:
        """Probability of reading ``value`` on ``name`` and the normalised post-state."""
        t = self.amplitudes.reshape(self.system.dims)
        i = self.system.index(name)
        sl = [slice(None)] * len(self.system)
        sl[i] = slice(value, value + 1)
        sub = np.zeros_like(t)
        sub[tuple(sl)] = t[tuple(sl)]
        v = sub.reshape(-1)
        p = float(np.vdot(v, v).real)
        if p <= 0.0:
            return 0.0, None
        return p, PureState._trusted(self.system, v / math.sqrt(p))

    def to_json(self) -> dict:
        return {
            "registers": self.system.to_json(),
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }

    @classmethod
    def from_json(cls, data: dict) -> "PureState":
        amps = np.array([complex(re, im) for re, im in data["amplitudes"]])
        return cls(RegisterSystem.from_json(data["registers"]), amps)


State = Union[DensityMatrix, PureState]


def as_density(state: State) -> DensityMatrix:
    return state.density() if isinstance(state, PureState) else state


def marginal(state: State, keep: Iterable[str]) -> DensityMatrix:
    """Reduced density matrix of either state kind."""
    if isinstance(state, PureState):
        return state.marginal(keep)
    return partial_trace(state, keep)


def tensor(a: State, b: State) -> State:
    """Kronecker product; the result is pure iff both factors are pure."""
    system = a.system.concat(b.system)
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState._trusted(system, np.kron(a.amplitudes, b.amplitudes))
    return DensityMatrix._trusted(system, np.kron(as_density(a).matrix, as_density(b).matrix))


def partial_trace(rho: DensityMatrix, keep: Iterable[str]) -> DensityMatrix:
    """Marginal of ``rho`` on ``keep``; kept registers stay in system order."""
    if isinstance(rho, PureState):
        return rho.marginal(keep)
    system = rho.system
    keep = system.ordered(keep)
    if keep == system.names:
        return rho
    rest = system.complement(keep)
    m = _permute_matrix(rho.matrix, system, keep + rest)
    dk, dr = system.dim_of(keep), system.dim_of(rest)
    reduced = np.einsum("ajbj->ab", m.reshape(dk, dr, dk, dr))
    return DensityMatrix._trusted(system.select(keep), reduced)


@dataclass(frozen=True, eq=False)
class Isometry:
    """Linear map from ``inputs`` registers to fresh ``outputs`` registers."""

    inputs: tuple[str, ...]
    outputs: tuple[tuple[str, int], ...]
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple((str(n), int(d)) for n, d in self.outputs))
        m = np.asarray(self.matrix, dtype=complex)
        dout = math.prod(d for _, d in self.outputs)
        if m.ndim != 2 or m.shape[0] != dout:
            raise StateError(f"isometry matrix shape {m.shape} does not match output dimension {dout}")
        object.__setattr__(self, "matrix", m)

    def defect(self) -> float:
        """``max |U^dagger U - I|``."""
        m = self.matrix
        return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[1]))))


def controlled_isometry(
    control: tuple[str, int] | Sequence[tuple[str, int]],
    inputs: Sequence[str],
    outputs: Sequence[tuple[str, int]],
    blocks: Sequence[np.ndarray],
) -> Isometry:
    """``sum_x |x><x| (x) W_x`` acting on the control register(s) together with ``inputs``.

    With several control registers, ``blocks`` is indexed by their joint value
    in lexicographic order.
    """
    controls = [control] if isinstance(control[0], str) else list(control)
    controls = [(str(n), int(d)) for n, d in controls]
    dc = math.prod(d for _, d in controls)
    blocks = [np.asarray(b, dtype=complex) for b in blocks]
    if len(blocks) != dc:
        raise StateError(f"need {dc} blocks, got {len(blocks)}")
    dout, din = blocks[0].shape
    big = np.zeros((dc * dout, dc * din), dtype=complex)
    for x, w in enumerate(blocks):
        if w.shape != (dout, din):
            raise StateError("all blocks must share one shape")
        big[x * dout:(x + 1) * dout, x * din:(x + 1) * din] = w
    names = tuple(n for n, _ in controls)
    return Isometry(names + tuple(inputs), tuple(controls) + tuple(outputs), big)


def apply_isometry(state: State, iso: Isometry) -> State:
    """Apply ``iso``; outputs take the position of the first input register."""
    system = state.system
    inputs = system.check_subset(iso.inputs)
    din = system.dim_of(inputs)
    if iso.matrix.shape[1] != din:
        raise StateError(f"isometry expects input dimension {iso.matrix.shape[1]}, registers give {din}")
    rest = system.complement(inputs)
    front = RegisterSystem(iso.outputs).concat(system.select(rest))
    first = min(system.index(n) for n in inputs)
    final_order = [n for n in system.names[:first] if n not in inputs]
    final_order += [n for n, _ in iso.outputs]
    final_order += [n for n in system.names[first:] if n not in inputs]
    u = iso.matrix
    if isinstance(state, PureState):
        v = _permute_vector(state.amplitudes, system, inputs + rest).reshape(din, -1)
        out = PureState._trusted(front, (u @ v).reshape(-1))
    else:
        m = _permute_matrix(state.matrix, system, inputs + rest)
        dr = system.dim_of(rest)
        m = m.reshape(din, dr, din, dr)
        m = np.einsum("ai,ijkl,bk->ajbl", u, m, u.conj()).reshape(front.dim, front.dim)
        out = DensityMatrix._trusted(front, m)
    return out.reorder(final_order)


def embed_diagonal(p: ProbTable) -> DensityMatrix:
    """Classical table as a diagonal state, one register per variable."""
    system = RegisterSystem(tuple((v, len(s)) for v, s in zip(p.names, p.supports)))
    return DensityMatrix._trusted(system, np.diag(p.weights.reshape(-1).astype(complex)))


def canonical_purification(p: ProbTable, ref_prefix: str = "R_") -> PureState:
    """``sum_i sqrt(p(i)) |i>|i>`` with a reference register after each variable."""
    regs: list[tuple[str, int]] = []
    for v, s in zip(p.names, p.supports):
        regs += [(v, len(s)), (ref_prefix + v, len(s))]
    system = RegisterSystem(tuple(regs))
    amps = np.zeros(system.dims, dtype=complex)
    w = p.weights
    for idx in zip(*np.nonzero(w)):
        doubled = tuple(i for i in idx for _ in (0, 1))
        amps[doubled] = math.sqrt(w[idx])
    return PureState._trusted(system, amps.reshape(-1))


def purify(rho: DensityMatrix, mapping: dict[str, str] | None = None) -> PureState:
    """Purification ``sum_ij sqrt(rho)_ij |i>|j>``; reference registers are renamed copies.

    ``mapping`` names the copies; by default register ``N`` is copied to ``R_N``.
    """
    from .measures import sqrt_psd

    mapping = mapping or {n: "R_" + n for n in rho.names}
    ref = rho.system.rename(mapping)
    vec = sqrt_psd(rho.matrix).reshape(-1)
    return PureState._trusted(rho.system.concat(ref), vec / np.linalg.norm(vec))


def merge_registers(state: State, groups: dict[str, Sequence[str]]) -> State:
    """Fuse each group of registers into one register named by its key.

    Unlisted registers are kept; the fused register's basis is the
    lexicographic product of the group, in the listed order.
    """
    system = state.system
    used = [n for g in groups.values() for n in g]
    system.check_subset(used)
    order: list[str] = []
    regs: list[tuple[str, int]] = []
    placed: set[str] = set()
    for n in system.names:
        if n in placed:
            continue
        group = next(((k, g) for k, g in groups.items() if n in g), None)
        if group is None:
            order.append(n)
            regs.append((n, system.dim_of((n,))))
            placed.add(n)
        else:
            key, members = group
            order.extend(members)
            regs.append((key, system.dim_of(members)))
            placed.update(members)
    moved = state.reorder(order)
    new = RegisterSystem(tuple(regs))
    if isinstance(moved, PureState):
        return PureState._trusted(new, moved.amplitudes)
    return DensityMatrix._trusted(new, moved.matrix)


def matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def matrix_from_json(rows: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)
