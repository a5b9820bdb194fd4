"""Symmetric k-ary pointer jumping.

Internal nodes of the complete k-ary tree of depth ``n`` are the strings of
length ``< n`` over ``{0..k-1}``; leaves are the strings of length ``n``. Node
functions ``x, y`` map internal nodes to ``[k]``, leaf functions ``f, g`` map
leaves to bits. Both are stored as flat arrays in level order: node ``z`` has
rank ``(k^|z| - 1)/(k - 1) + int(z, base k)``.

A string ``z`` with ``|z| > j`` is consistent with ``(x, y, j)`` when its
character at position ``j`` (0-based) equals ``x(w) + y(w) mod k`` for its
depth-``j`` prefix ``w``. The target string follows these pointer sums from the
root; the task is ``f(target) xor g(target)``.

Samplers only use ``rng.integers`` and ``rng.choice`` so that
:func:`sampler_law` can enumerate their exact output distribution.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from itertools import product
from typing import Any, Callable, Iterable, Mapping

import numpy as np

from .errors import DomainError, SizeError
from .protocol_sim import Message, Output, ProtocolSpec, View, schedule_of
from .qmath.prob import ProbTable
from .rng import stream

DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"
DEFAULT_SIZE_CAP = 1 << 22
DEFAULT_ENUM_CAP = 1 << 16


@dataclass(frozen=True)
class PJParams:
    k: int
    n: int

    def __post_init__(self):
        if self.k < 2 or self.k > len(DIGITS):
            raise DomainError(f"k must be in 2..{len(DIGITS)}")
        if self.n < 1:
            raise DomainError("n must be at least 1")
        if self.num_nodes + self.num_leaves > DEFAULT_SIZE_CAP:
            raise SizeError(
                f"tree with {self.num_nodes} nodes and {self.num_leaves} leaves exceeds cap",
                estimated=self.num_nodes + self.num_leaves,
            )

    @property
    def num_nodes(self) -> int:
        return (self.k**self.n - 1) // (self.k - 1)

    @property
    def num_leaves(self) -> int:
        return self.k**self.n

    def level_start(self, depth: int) -> int:
        return (self.k**depth - 1) // (self.k - 1)

    def rank(self, z: tuple[int, ...]) -> int:
        v = 0
        for c in z:
            v = v * self.k + c
        return self.level_start(len(z)) + v if len(z) < self.n else v

    def string(self, depth: int, index: int) -> tuple[int, ...]:
        out = []
        for _ in range(depth):
            index, c = divmod(index, self.k)
            out.append(c)
        return tuple(reversed(out))

    def node_depths(self) -> np.ndarray:
        return np.repeat(np.arange(self.n), [self.k**d for d in range(self.n)])

    @property
    def message_width(self) -> int:
        return max(1, math.ceil(math.log2(self.k)))


def encode_string(z: Iterable[int]) -> str:
    return "".join(DIGITS[c] for c in z)


def decode_string(s: str) -> tuple[int, ...]:
    return tuple(DIGITS.index(c) for c in s)


def _as_tuple(z) -> tuple[int, ...]:
    return decode_string(z) if isinstance(z, str) else tuple(int(c) for c in z)


@dataclass(frozen=True, eq=False)
class NodeFunction:
    params: PJParams
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.int64).reshape(-1)
        if v.size != self.params.num_nodes:
            raise DomainError(f"node function needs {self.params.num_nodes} values, got {v.size}")
        if v.size and (v.min() < 0 or v.max() >= self.params.k):
            raise DomainError("node values must lie in [k]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __getitem__(self, z) -> int:
        z = _as_tuple(z)
        if len(z) >= self.params.n:
            raise DomainError(f"{encode_string(z)!r} is not an internal node")
        return int(self.values[self.params.rank(z)])

    def to_json(self) -> dict[str, int]:
        p = self.params
        return {
            encode_string(p.string(d, i)): int(self.values[p.level_start(d) + i])
            for d in range(p.n)
            for i in range(p.k**d)
        }

    @classmethod
    def from_json(cls, params: PJParams, data: Mapping[str, int]) -> "NodeFunction":
        v = np.zeros(params.num_nodes, dtype=np.int64)
        for key, val in data.items():
            v[params.rank(decode_string(key))] = val
        if len(data) != params.num_nodes:
            raise DomainError("node function domain incomplete")
        return cls(params, v)


@dataclass(frozen=True, eq=False)
class LeafFunction:
    params: PJParams
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.int64).reshape(-1)
        if v.size != self.params.num_leaves:
            raise DomainError(f"leaf function needs {self.params.num_leaves} values, got {v.size}")
        if v.min() < 0 or v.max() > 1:
            raise DomainError("leaf values must be bits")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __getitem__(self, z) -> int:
        z = _as_tuple(z)
        if len(z) != self.params.n:
            raise DomainError(f"{encode_string(z)!r} is not a leaf")
        return int(self.values[self.params.rank(z)])

    def to_json(self) -> dict[str, int]:
        p = self.params
        return {encode_string(p.string(p.n, i)): int(v) for i, v in enumerate(self.values)}

    @classmethod
    def from_json(cls, params: PJParams, data: Mapping[str, int]) -> "LeafFunction":
        if len(data) != params.num_leaves:
            raise DomainError("leaf function domain incomplete")
        v = np.zeros(params.num_leaves, dtype=np.int64)
        for key, val in data.items():
            v[params.rank(decode_string(key))] = val
        return cls(params, v)


@dataclass(frozen=True, eq=False)
class PJInstance:
    params: PJParams
    x: NodeFunction
    y: NodeFunction
    f: LeafFunction
    g: LeafFunction
    j: int

    def __post_init__(self):
        if not 0 <= self.j < self.params.n:
            raise DomainError(f"hidden layer {self.j} outside 0..{self.params.n - 1}")

    def key(self) -> tuple:
        return (
            self.j,
            tuple(self.x.values.tolist()),
            tuple(self.y.values.tolist()),
            tuple(self.f.values.tolist()),
            tuple(self.g.values.tolist()),
        )

    def to_json(self) -> dict:
        return {
            "k": self.params.k,
            "n": self.params.n,
            "j": self.j,
            "x": self.x.to_json(),
            "y": self.y.to_json(),
            "f": self.f.to_json(),
            "g": self.g.to_json(),
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "PJInstance":
        params = PJParams(int(data["k"]), int(data["n"]))
        return cls(
            params,
            NodeFunction.from_json(params, data["x"]),
            NodeFunction.from_json(params, data["y"]),
            LeafFunction.from_json(params, data["f"]),
            LeafFunction.from_json(params, data["g"]),
            int(data["j"]),
        )

    @classmethod
    def from_arrays(cls, params: PJParams, j, x, y, f, g) -> "PJInstance":
        return cls(params, NodeFunction(params, x), NodeFunction(params, y), LeafFunction(params, f), LeafFunction(params, g), int(j))


# consistency


def is_consistent(z, x: NodeFunction, y: NodeFunction, j: int) -> bool:
    z = _as_tuple(z)
    if len(z) <= j:
        raise DomainError(f"consistency needs |z| > j; got |z|={len(z)}, j={j}")
    w = z[:j]
    return z[j] == (x[w] + y[w]) % x.params.k


@dataclass(frozen=True)
class ConsistentSet:
    """One chosen child per depth-``j`` node; members are all strings extending ``w + chosen[w]``."""

    params: PJParams
    j: int
    chosen_child: tuple[int, ...]

    def __contains__(self, z) -> bool:
        z = _as_tuple(z)
        if len(z) <= self.j or len(z) > self.params.n:
            return False
        w = z[: self.j]
        idx = self.params.rank(w) - self.params.level_start(self.j)
        return z[self.j] == self.chosen_child[idx]

    def size(self) -> int:
        k, n, j = self.params.k, self.params.n, self.j
        return k**j * (k ** (n - j) - 1) // (k - 1)

    def members(self) -> list[tuple[int, ...]]:
        p = self.params
        out = []
        for d in range(self.j + 1, p.n + 1):
            for i in range(p.k**d):
                z = p.string(d, i)
                if z in self:
                    out.append(z)
        return out


def consistent_children(x: NodeFunction, y: NodeFunction, j: int) -> ConsistentSet:
    p = x.params
    lo, hi = p.level_start(j), p.level_start(j + 1)
    chosen = tuple(int(c) for c in (x.values[lo:hi] + y.values[lo:hi]) % p.k)
    return ConsistentSet(p, j, chosen)


def _chosen(params: PJParams, xv: np.ndarray, yv: np.ndarray, j: int) -> np.ndarray:
    lo, hi = params.level_start(j), params.level_start(j + 1)
    return (xv[lo:hi] + yv[lo:hi]) % params.k


def consistency_masks(params: PJParams, chosen: np.ndarray, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Boolean masks over internal nodes and leaves marking consistent strings."""
    k, n = params.k, params.n
    node_mask = np.zeros(params.num_nodes, dtype=bool)
    leaf_mask = np.zeros(params.num_leaves, dtype=bool)
    for d in range(j + 1, n + 1):
        idx = np.arange(k**d)
        prefix = idx // k ** (d - j)
        char = (idx // k ** (d - j - 1)) % k
        ok = char == chosen[prefix]
        if d < n:
            node_mask[params.level_start(d):params.level_start(d + 1)] = ok
        else:
            leaf_mask[:] = ok
    return node_mask, leaf_mask


def target_string(x: NodeFunction, y: NodeFunction) -> tuple[int, ...]:
    z: tuple[int, ...] = ()
    for _ in range(x.params.n):
        z = z + ((x[z] + y[z]) % x.params.k,)
    return z


def evaluate_task(instance: PJInstance) -> int:
    z = target_string(instance.x, instance.y)
    return (instance.f[z] + instance.g[z]) % 2


def satisfies_event(instance: PJInstance, b: int) -> bool:
    """Full scan: ``x = y`` on consistent internal nodes, ``f xor g = b`` on consistent leaves."""
    p = instance.params
    chosen = _chosen(p, instance.x.values, instance.y.values, instance.j)
    nodes, leaves = consistency_masks(p, chosen, instance.j)
    return bool(
        np.all(instance.x.values[nodes] == instance.y.values[nodes])
        and np.all((instance.f.values[leaves] ^ instance.g.values[leaves]) == b)
    )


def in_fooling_support(instance: PJInstance) -> bool:
    c = instance.params.level_start(instance.j)
    return bool(np.all(instance.x.values[:c] == instance.y.values[:c]))


# samplers


def hidden_layer_law(params: PJParams) -> np.ndarray:
    """Law of ``j`` after conditioning the fooling distribution on either event.

    Given ``j``, each of the ``k^j (k^(n-j-1) - 1)/(k - 1)`` consistent internal
    nodes must have ``x = y`` (probability ``1/k`` each), while the number of
    consistent leaves does not depend on ``j``.
    """
    k, n = params.k, params.n
    logw = np.array([-(k**j) * (k ** (n - j - 1) - 1) // (k - 1) * math.log(k) for j in range(n)])
    w = np.exp(logw - logw.max())
    return w / w.sum()


def _fooling_with(params: PJParams, rng) -> PJInstance:
    k, n = params.k, params.n
    j = int(rng.integers(0, n))
    x = np.asarray(rng.integers(0, k, size=params.num_nodes), dtype=np.int64)
    y = x.copy()
    c = params.level_start(j)
    y[c:] = rng.integers(0, k, size=params.num_nodes - c)
    f = np.asarray(rng.integers(0, 2, size=params.num_leaves), dtype=np.int64)
    g = np.asarray(rng.integers(0, 2, size=params.num_leaves), dtype=np.int64)
    return PJInstance.from_arrays(params, j, x, y, f, g)


def _hard_with(params: PJParams, b: int, rng) -> PJInstance:
    k, n = params.k, params.n
    law = hidden_layer_law(params)
    j = int(rng.choice(n, p=law)) if n > 1 else 0
    x = np.asarray(rng.integers(0, k, size=params.num_nodes), dtype=np.int64)
    y = x.copy()
    lo, hi = params.level_start(j), params.level_start(j + 1)
    y[lo:hi] = rng.integers(0, k, size=hi - lo)
    nodes, leaves = consistency_masks(params, _chosen(params, x, y, j), j)
    free = np.zeros(params.num_nodes, dtype=bool)
    free[hi:] = ~nodes[hi:]
    y[free] = rng.integers(0, k, size=int(free.sum()))
    f = np.asarray(rng.integers(0, 2, size=params.num_leaves), dtype=np.int64)
    g = f ^ b
    g[~leaves] = rng.integers(0, 2, size=int((~leaves).sum()))
    return PJInstance.from_arrays(params, j, x, y, f, g)


def _rng(seed) -> Any:
    return seed if hasattr(seed, "integers") else stream(int(seed), "pj")


def sample_fooling(params: PJParams, seed) -> PJInstance:
    """One draw from the fooling distribution ``p``."""
    return _fooling_with(params, _rng(seed))


def sample_hard(params: PJParams, b: int, seed) -> PJInstance:
    """Exact draw from ``p`` conditioned on the event ``E_b``, without rejection."""
    if b not in (0, 1):
        raise DomainError("b must be 0 or 1")
    return _hard_with(params, b, _rng(seed))


def sample_mixture(params: PJParams, seed) -> tuple[int, PJInstance]:
    """Fair coin ``b`` followed by a draw from ``mu_b``."""
    rng = _rng(seed)
    b = int(rng.integers(0, 2))
    return b, _hard_with(params, b, rng)


# exact laws


class _Branch(Exception):
    def __init__(self, options: int):
        self.options = options


class _Replay:
    """Generator stand-in that follows a fixed prefix of choices, then branches."""

    def __init__(self, prefix: list[int]):
        self.prefix = prefix
        self.pos = 0
        self.prob = 1.0

    def _next(self, options: int) -> int:
        if self.pos < len(self.prefix):
            i = self.prefix[self.pos]
            self.pos += 1
            return i
        raise _Branch(options)

    def integers(self, low, high=None, size=None):
        if high is None:
            low, high = 0, low
        span = high - low
        if size is None:
            i = self._next(span)
            self.prob /= span
            return low + i
        count = span**size
        i = self._next(count) if size else 0
        self.prob /= count
        digits = []
        for _ in range(size):
            i, d = divmod(i, span)
            digits.append(low + d)
        return np.array(digits[::-1], dtype=np.int64)

    def choice(self, a, p=None):
        n = a if isinstance(a, int) else len(a)
        i = self._next(n)
        self.prob *= (1.0 / n) if p is None else float(p[i])
        return i if isinstance(a, int) else a[i]


def sampler_law(sampler: Callable[[Any], Any], key: Callable[[Any], Any] = lambda v: v, limit: int = 1 << 20) -> dict:
    """Exact output law of a sampler that draws only through ``integers``/``choice``."""
    law: dict = defaultdict(float)
    pending: list[list[int]] = [[]]
    visited = 0
    while pending:
        prefix = pending.pop()
        chooser = _Replay(prefix)
        try:
            out = sampler(chooser)
        except _Branch as br:
            pending.extend(prefix + [i] for i in range(br.options - 1, -1, -1))
            continue
        visited += 1
        if visited > limit:
            raise SizeError(f"sampler has more than {limit} outcomes", estimated=visited)
        if chooser.prob > 0.0:
            law[key(out)] += chooser.prob
    return dict(law)


PJ_VARIABLES = ("j", "x", "y", "f", "g")


def _pj_table(params: PJParams, atoms: Mapping[tuple, float]) -> ProbTable:
    return ProbTable.from_atoms(PJ_VARIABLES, atoms)


def sampler_table(params: PJParams, which: str) -> ProbTable:
    """Exact law of :func:`sample_fooling` / :func:`sample_hard` as a table."""
    if which == "p":
        fn = lambda r: _fooling_with(params, r)
    elif which in ("mu0", "mu1"):
        b = int(which[-1])
        fn = lambda r: _hard_with(params, b, r)
    else:
        raise DomainError(f"unknown distribution {which!r}")
    return _pj_table(params, sampler_law(fn, key=PJInstance.key))


def enumerate_distribution(
    params: PJParams,
    which: str,
    cap: int = DEFAULT_ENUM_CAP,
    event: Callable[[PJInstance], bool] | None = None,
) -> ProbTable:
    """Exact table by brute force over the whole input space.

    ``p`` is weighted directly from its definition; ``mu0``/``mu1`` restrict and
    renormalise. ``event`` replaces the conditioning event (for mutation tests).
    """
    k, n = params.k, params.n
    N, L = params.num_nodes, params.num_leaves
    total = n * k ** (2 * N) * 4**L
    if total > cap:
        raise SizeError(f"{total} atoms exceed the enumeration cap {cap}", estimated=total)
    if which not in ("p", "mu0", "mu1"):
        raise DomainError(f"unknown distribution {which!r}")
    if event is None and which != "p":
        b = int(which[-1])
        event = lambda inst: satisfies_event(inst, b)
    atoms: dict[tuple, float] = {}
    node_space = list(product(range(k), repeat=N))
    leaf_space = list(product(range(2), repeat=L))
    for j in range(n):
        c = params.level_start(j)
        count = k**N * k ** (N - c) * 4**L
        w = 1.0 / (n * count)
        for xv in node_space:
            for yv in node_space:
                if xv[:c] != yv[:c]:
                    continue
                for fv in leaf_space:
                    for gv in leaf_space:
                        if event is not None:
                            inst = PJInstance.from_arrays(params, j, xv, yv, fv, gv)
                            if not event(inst):
                                continue
                        atoms[(j, xv, yv, fv, gv)] = w
    if event is not None:
        z = sum(atoms.values())
        atoms = {a: v / z for a, v in atoms.items()}
    return _pj_table(params, atoms)


def _conditional_views(params: PJParams, table: ProbTable) -> tuple[dict, dict]:
    """Per context ``(j, x_<=j, y_<=j)``, the normalised laws of ``(x, f)`` and ``(y, g)``."""
    alice: dict = defaultdict(lambda: defaultdict(float))
    bob: dict = defaultdict(lambda: defaultdict(float))
    for (j, xv, yv, fv, gv), w in table.items():
        c = params.level_start(j + 1)
        ctx = (j, xv[:c], yv[:c])
        alice[ctx][(xv, fv)] += w
        bob[ctx][(yv, gv)] += w
    for views in (alice, bob):
        for ctx, law in views.items():
            z = sum(law.values())
            for key in law:
                law[key] /= z
    return alice, bob


def _same(a: dict, b: dict, tol: float) -> bool:
    if set(a) != set(b):
        return False
    for ctx in a:
        la, lb = a[ctx], b[ctx]
        keys = set(la) | set(lb)
        if any(abs(la.get(k, 0.0) - lb.get(k, 0.0)) > tol for k in keys):
            return False
    return True


def check_marginal_equality(
    params: PJParams,
    tables: Mapping[str, ProbTable] | None = None,
    tol: float = 1e-12,
) -> bool:
    """Do ``p``, ``mu0`` and ``mu1`` induce the same laws of ``(x, f)`` and ``(y, g)``
    given ``(j, x_<=j, y_<=j)``?"""
    tables = dict(tables or {})
    for which in ("p", "mu0", "mu1"):
        if which not in tables:
            tables[which] = enumerate_distribution(params, which)
    ref_a, ref_b = _conditional_views(params, tables["p"])
    for which in ("mu0", "mu1"):
        a, b = _conditional_views(params, tables[which])
        if not (_same(ref_a, a, tol) and _same(ref_b, b, tol)):
            return False
    return True


# baseline protocol


def pj_inputs(instance: PJInstance) -> tuple[tuple, tuple]:
    return (instance.x, instance.f), (instance.y, instance.g)


def _path(params: PJParams, history) -> tuple[int, ...]:
    """Prefix of the target string reconstructed from completed reveal pairs."""
    z: tuple[int, ...] = ()
    for i in range(0, len(history) - 1, 2):
        a, b = int(history[i][1], 2), int(history[i + 1][1], 2)
        z = z + ((a + b) % params.k,)
    return z


def follow_path_protocol(params: PJParams) -> ProtocolSpec:
    """Walk the target path by mutual reveals, then Alice sends ``f(target)``.

    Costs exactly ``2 n ceil(log2 k) + 1`` bits and never errs.
    """
    w, n = params.message_width, params.n

    def alice(v: View):
        x, f = v.input
        z = _path(params, v.history)
        if len(z) < n:
            return Message(format(x[z], f"0{w}b"))
        return Message(str(f[z]))

    def bob(v: View):
        y, g = v.input
        if len(v.history) == 2 * n + 1:
            z = _path(params, v.history[:-1])
            return Output((int(v.history[-1][1]) + g[z]) % 2)
        z = _path(params, v.history[:-1])
        return Message(format(y[z], f"0{w}b"))

    turns = [t for _ in range(n) for t in (("A", w), ("B", w))] + [("A", 1), ("B", 0)]
    return ProtocolSpec(alice, bob, schedule_of(*turns), name=f"follow_path_k{params.k}_n{params.n}")


def pj_task(a: tuple, b: tuple) -> int:
    (x, f), (y, g) = a, b
    z = target_string(x, y)
    return (f[z] + g[z]) % 2
