"""Labelled tensor-product systems."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

from ..errors import RegisterError, SizeError

DEFAULT_DIM_CAP = 4096

_dim_cap = int(os.environ.get("CCLAB_DIM_CAP", DEFAULT_DIM_CAP))


def dim_cap() -> int:
    return _dim_cap


def set_dim_cap(cap: int) -> None:
    """Change the total-dimension cap for all subsequently built systems."""
    global _dim_cap
    if cap < 1:
        raise ValueError("dimension cap must be positive")
    _dim_cap = int(cap)


@dataclass(frozen=True)
class RegisterSystem:
    """Ordered registers ``(name, dim)`` forming a tensor product space.

    Basis states are ordered lexicographically with the first register most
    significant, matching ``np.kron`` of the factors in order.
    """

    registers: tuple[tuple[str, int], ...]

    def __post_init__(self):
        regs = tuple((str(n), int(d)) for n, d in self.registers)
        object.__setattr__(self, "registers", regs)
        names = [n for n, _ in regs]
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise RegisterError(f"duplicate register names: {dup}")
        for n, d in regs:
            if d < 1:
                raise RegisterError(f"register {n!r} has dimension {d} < 1")
        total = math.prod(d for _, d in regs)
        if total > _dim_cap:
            raise SizeError(
                f"total dimension {total} exceeds cap {_dim_cap}", estimated=total
            )

    @classmethod
    def of(cls, *pairs: tuple[str, int], **dims: int) -> "RegisterSystem":
        """``RegisterSystem.of(("A", 2), ("B", 3))`` or ``RegisterSystem.of(A=2, B=3)``."""
        return cls(tuple(pairs) + tuple(dims.items()))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.registers)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.registers)

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    def __contains__(self, name: str) -> bool:
        return name in self.names

    def __len__(self) -> int:
        return len(self.registers)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise RegisterError(f"unknown register {name!r}; have {self.names}") from None

    def dim_of(self, names: Iterable[str]) -> int:
        return math.prod(self.registers[self.index(n)][1] for n in names)

    def check_subset(self, names: Iterable[str]) -> tuple[str, ...]:
        names = tuple(names)
        for n in names:
            self.index(n)
        if len(set(names)) != len(names):
            raise RegisterError(f"repeated register in {names}")
        return names

    def select(self, names: Iterable[str]) -> "RegisterSystem":
        """Subsystem on ``names`` in the given order."""
        names = self.check_subset(names)
        return RegisterSystem(tuple((n, self.registers[self.index(n)][1]) for n in names))

    def ordered(self, names: Iterable[str]) -> tuple[str, ...]:
        """``names`` sorted into this system's register order."""
        wanted = set(self.check_subset(names))
        return tuple(n for n in self.names if n in wanted)

    def complement(self, names: Iterable[str]) -> tuple[str, ...]:
        drop = set(self.check_subset(names))
        return tuple(n for n in self.names if n not in drop)

    def concat(self, other: "RegisterSystem") -> "RegisterSystem":
        clash = set(self.names) & set(other.names)
        if clash:
            raise RegisterError(f"register name collision: {sorted(clash)}")
        return RegisterSystem(self.registers + other.registers)

    def rename(self, mapping: dict[str, str]) -> "RegisterSystem":
        return RegisterSystem(tuple((mapping.get(n, n), d) for n, d in self.registers))

    def to_json(self) -> list[dict]:
        return [{"name": n, "dim": d} for n, d in self.registers]

    @classmethod
    def from_json(cls, data: Sequence[dict]) -> "RegisterSystem":
        return cls(tuple((r["name"], r["dim"]) for r in data))
