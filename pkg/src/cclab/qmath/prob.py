"""Exact finite joint distributions and their Shannon quantities (bits)."""

from __future__ import annotations

import math
import re
from collections import defaultdict
from dataclasses import dataclass
from itertools import product
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from ..errors import DomainError, RegisterError, StateError

SUM_TOL = 1e-12


def _sorted_support(values: Iterable[Hashable]) -> tuple:
    values = list(dict.fromkeys(values))
    try:
        return tuple(sorted(values))
    except TypeError:
        return tuple(sorted(values, key=repr))


def _plogp_sum(weights: Iterable[float]) -> float:
    h = 0.0
    for w in weights:
        if w > 0.0:
            h -= w * math.log2(w)
    return max(h, 0.0)


@dataclass(frozen=True, eq=False)
class ProbTable:
    """Joint distribution over named variables with finite supports.

    Atoms are stored sparsely as ``{assignment tuple: weight}``; zero-weight
    atoms are dropped. ``supports`` fixes the lexicographic order used for
    dense views and serialization.
    """

    names: tuple[str, ...]
    supports: tuple[tuple, ...]
    atoms: Mapping[tuple, float]

    def __post_init__(self):
        names = tuple(self.names)
        if len(set(names)) != len(names):
            raise RegisterError(f"duplicate variable names in {names}")
        supports = tuple(tuple(s) for s in self.supports)
        if len(supports) != len(names):
            raise StateError("one support per variable required")
        total = 0.0
        clean: dict[tuple, float] = {}
        for a, w in self.atoms.items():
            w = float(w)
            if w < 0.0:
                raise StateError(f"negative weight {w} at {a}")
            if w > 0.0:
                clean[tuple(a)] = w
                total += w
        if abs(total - 1.0) > SUM_TOL:
            raise StateError(f"weights sum to {total!r}, not 1")
        lookup = [set(s) for s in supports]
        for a in clean:
            if len(a) != len(names) or any(v not in lookup[i] for i, v in enumerate(a)):
                raise StateError(f"atom {a} outside the declared supports")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "supports", supports)
        object.__setattr__(self, "atoms", clean)

    # construction

    @classmethod
    def from_atoms(
        cls,
        names: Sequence[str],
        atoms: Iterable[tuple[tuple, float]] | Mapping[tuple, float],
        supports: Sequence[Sequence] | None = None,
        normalize: bool = False,
    ) -> "ProbTable":
        """Build from (assignment, weight) pairs, merging duplicates."""
        items = atoms.items() if isinstance(atoms, Mapping) else atoms
        merged: dict[tuple, float] = defaultdict(float)
        for a, w in items:
            merged[tuple(a)] += float(w)
        if normalize:
            z = sum(merged.values())
            if z <= 0.0:
                raise StateError("cannot normalise an all-zero table")
            merged = {a: w / z for a, w in merged.items()}
        names = tuple(names)
        if supports is None:
            supports = [
                _sorted_support(a[i] for a, w in merged.items() if w > 0.0) for i in range(len(names))
            ]
        return cls(names, tuple(tuple(s) for s in supports), dict(merged))

    @classmethod
    def from_weights(cls, variables: Sequence[tuple[str, Sequence]], weights) -> "ProbTable":
        """Dense construction; ``weights`` in lexicographic assignment order."""
        names = tuple(v for v, _ in variables)
        supports = tuple(tuple(s) for _, s in variables)
        w = np.asarray(weights, dtype=float).reshape(-1)
        if w.size != math.prod(len(s) for s in supports):
            raise StateError("weight count does not match the support product")
        atoms = {a: float(x) for a, x in zip(product(*supports), w)}
        return cls(names, supports, atoms)

    @classmethod
    def uniform(cls, variables: Sequence[tuple[str, Sequence]]) -> "ProbTable":
        supports = [tuple(s) for _, s in variables]
        n = math.prod(len(s) for s in supports)
        return cls.from_weights(variables, np.full(n, 1.0 / n))

    @classmethod
    def point(cls, assignment: Mapping[str, Hashable]) -> "ProbTable":
        names = tuple(assignment)
        return cls(names, tuple((assignment[n],) for n in names), {tuple(assignment.values()): 1.0})

    # views

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise RegisterError(f"unknown variable {name!r}; have {self.names}") from None

    def support_of(self, name: str) -> tuple:
        return self.supports[self.index(name)]

    def __len__(self) -> int:
        return len(self.atoms)

    def items(self):
        return self.atoms.items()

    def records(self):
        """Yield ``(dict assignment, weight)`` pairs."""
        for a, w in self.atoms.items():
            yield dict(zip(self.names, a)), w

    @property
    def weights(self) -> np.ndarray:
        """Dense weight tensor with one axis per variable."""
        shape = tuple(len(s) for s in self.supports)
        pos = [{v: i for i, v in enumerate(s)} for s in self.supports]
        out = np.zeros(shape)
        for a, w in self.atoms.items():
            out[tuple(pos[i][v] for i, v in enumerate(a))] = w
        return out

    def prob(self, event: Mapping[str, Hashable] | Callable[[dict], bool]) -> float:
        if callable(event):
            return sum(w for rec, w in self.records() if event(rec))
        idx = [(self.index(k), v) for k, v in event.items()]
        return sum(w for a, w in self.atoms.items() if all(a[i] == v for i, v in idx))

    def expectation(self, fn: Callable[[dict], float]) -> float:
        return sum(w * fn(rec) for rec, w in self.records())

    # transformations

    def marginal(self, names: Iterable[str]) -> "ProbTable":
        names = tuple(names)
        idx = [self.index(n) for n in names]
        out: dict[tuple, float] = defaultdict(float)
        for a, w in self.atoms.items():
            out[tuple(a[i] for i in idx)] += w
        return ProbTable(names, tuple(self.supports[i] for i in idx), dict(out))

    def condition(self, event: Mapping[str, Hashable] | Callable[[dict], bool]) -> "ProbTable":
        if callable(event):
            keep = {a: w for a, w in self.atoms.items() if event(dict(zip(self.names, a)))}
        else:
            idx = [(self.index(k), v) for k, v in event.items()]
            keep = {a: w for a, w in self.atoms.items() if all(a[i] == v for i, v in idx)}
        z = sum(keep.values())
        if z <= 0.0:
            raise DomainError("conditioning on a probability-zero event")
        return ProbTable(self.names, self.supports, {a: w / z for a, w in keep.items()})

    def derive(self, **fns: Callable[[dict], Hashable]) -> "ProbTable":
        """Append variables computed from each atom, e.g. ``derive(s=lambda r: r["x"] ^ r["y"])``."""
        new = tuple(fns)
        clash = set(new) & set(self.names)
        if clash:
            raise RegisterError(f"variables already present: {sorted(clash)}")
        out: dict[tuple, float] = defaultdict(float)
        for a, w in self.atoms.items():
            rec = dict(zip(self.names, a))
            out[a + tuple(fns[n](rec) for n in new)] += w
        return ProbTable.from_atoms(
            self.names + new,
            out,
            supports=list(self.supports) + [_sorted_support(k[len(self.names) + i] for k in out) for i in range(len(new))],
        )

    def rename(self, mapping: Mapping[str, str]) -> "ProbTable":
        return ProbTable(tuple(mapping.get(n, n) for n in self.names), self.supports, self.atoms)

    def product(self, other: "ProbTable") -> "ProbTable":
        atoms = {a + b: wa * wb for a, wa in self.atoms.items() for b, wb in other.atoms.items()}
        return ProbTable(self.names + other.names, self.supports + other.supports, atoms)

    def max_abs_diff(self, other: "ProbTable") -> float:
        """Largest atom-wise weight difference (variables aligned by name)."""
        if sorted(self.names) != sorted(other.names):
            raise RegisterError("tables have different variables")
        o = other.marginal(self.names) if other.names != self.names else other
        keys = set(self.atoms) | set(o.atoms)
        return max((abs(self.atoms.get(k, 0.0) - o.atoms.get(k, 0.0)) for k in keys), default=0.0)

    # serialization

    def to_json(self) -> dict:
        return {
            "variables": [{"name": n, "support": [_jsonable(v) for v in s]} for n, s in zip(self.names, self.supports)],
            "weights": [float(w) for w in self.weights.reshape(-1)],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "ProbTable":
        variables = [(v["name"], [_hashable(x) for x in v["support"]]) for v in data["variables"]]
        return cls.from_weights(variables, data["weights"])

    def to_density(self):
        from .states import embed_diagonal

        return embed_diagonal(self)


def _jsonable(v):
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.integer):
        return int(v)
    return v


def _hashable(v):
    if isinstance(v, list):
        return tuple(_hashable(x) for x in v)
    return v


# Shannon quantities


def _names(group: Iterable[str] | str) -> tuple[str, ...]:
    if isinstance(group, str):
        return tuple(s.strip() for s in group.split(",") if s.strip())
    return tuple(group)


def shannon_entropy(p: ProbTable, names: Iterable[str] | str) -> float:
    names = _names(names)
    if not names:
        return 0.0
    return _plogp_sum(p.marginal(names).atoms.values())


def _disjoint(*groups: tuple[str, ...]) -> None:
    seen: set[str] = set()
    for g in groups:
        if seen & set(g):
            raise RegisterError(f"variable groups overlap: {sorted(seen & set(g))}")
        seen |= set(g)


def classical_mi(p: ProbTable, a, b) -> float:
    a, b = _names(a), _names(b)
    _disjoint(a, b)
    return shannon_entropy(p, a) + shannon_entropy(p, b) - shannon_entropy(p, a + b)


def classical_cmi(p: ProbTable, a, b, c) -> float:
    a, b, c = _names(a), _names(b), _names(c)
    _disjoint(a, b, c)
    return (
        shannon_entropy(p, a + c)
        + shannon_entropy(p, b + c)
        - shannon_entropy(p, a + b + c)
        - shannon_entropy(p, c)
    )


_QUERY = re.compile(
    r"^\s*(?P<op>entropy|H|mi|I|cmi)\s*\(\s*(?P<a>[^;|()]+?)\s*(?:;\s*(?P<b>[^;|()]+?)\s*)?(?:\|\s*(?P<c>[^;|()]+?)\s*)?\)\s*$"
)


def classical_measures(p: ProbTable, query: str) -> float:
    """Evaluate ``entropy(A)``, ``mi(A;B)`` or ``cmi(A;B|C)`` on ``p``.

    ``H``/``I`` spellings work too; each slot takes comma-separated names.
    """
    m = _QUERY.match(query)
    if not m:
        raise DomainError(f"cannot parse query {query!r}")
    op, a, b, c = m["op"], m["a"], m["b"], m["c"]
    for group in (a, b, c):
        for n in _names(group or ""):
            p.index(n)
    if op in ("entropy", "H") and b is None:
        return shannon_entropy(p, a) if c is None else shannon_entropy(p, a + "," + c) - shannon_entropy(p, c)
    if b is None:
        raise DomainError(f"query {query!r} needs two groups")
    if c is None and op in ("mi", "I"):
        return classical_mi(p, a, b)
    if c is not None and op in ("cmi", "I"):
        return classical_cmi(p, a, b, c)
    raise DomainError(f"malformed query {query!r}")
