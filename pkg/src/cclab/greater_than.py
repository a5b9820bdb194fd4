"""Greater-Than with a bounded number of bits from Bob.

The protocol:

1. Whole-string equality test with ``t`` shared inner-product hashes; if the
   hashes agree Bob outputs 1.
2. Split the (zero-padded) inputs into ``m = 2^s`` blocks and run a checking
   walk over block-prefix boundaries to locate the first block where x and y
   differ. Every step is one prefix equality test: ``t`` bits from Alice, one
   verdict bit from Bob.
3. Alice sends the located block; Bob compares it with his own block and
   outputs ``x >= y``.

Hash tests are one-sided: a "differ" verdict is always right, so the upper end
of the walk interval is certain and only "equal" verdicts can mislead. Spare
walk steps re-test the lower end and backtrack when it turns out to differ.
Bob sends exactly ``1 + c1 * s`` bits (or 1 on early exit), which the budget
rule keeps at most ``b``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import DomainError, ProtocolError
from .protocol_sim import (
    CoinDomains,
    Message,
    Output,
    ProtocolSpec,
    StreamCoins,
    View,
    exact_joint,
    one_message_protocol,
    run,
    schedule_of,
)
from .qmath.prob import ProbTable, classical_measures
from .rng import stream

DEFAULT_EPS = 1 / 3
DEFAULT_C1 = 1


def _check_bits(s: str) -> None:
    if set(s) - {"0", "1"}:
        raise DomainError(f"not a bit string: {s!r}")


def gt(x: str, y: str) -> int:
    """1 iff ``int(x, 2) >= int(y, 2)``; strings are most-significant bit first."""
    if len(x) != len(y):
        raise DomainError(f"length mismatch: {len(x)} vs {len(y)}")
    _check_bits(x)
    _check_bits(y)
    return int(x >= y) if x else 1


def _parity(v: int) -> int:
    return bin(v).count("1") & 1


def inner_product_hashes(value: int, nbits: int, t: int, coins: StreamCoins, key) -> int:
    """``t`` hash bits (packed into an int) of an ``nbits``-bit value."""
    out = 0
    for r in range(t):
        out = (out << 1) | _parity(value & coins.bits((key, r), nbits))
    return out


@dataclass(frozen=True)
class HashResult:
    equal: bool
    alice_bits: int
    bob_bits: int


def hash_equal(x_slice: str, y_slice: str, t: int, coins: StreamCoins, key="slice") -> HashResult:
    """One-sided equality test: equal slices always pass."""
    if len(x_slice) != len(y_slice):
        raise DomainError("slices must have equal length")
    n = len(x_slice)
    xv = int(x_slice, 2) if n else 0
    yv = int(y_slice, 2) if n else 0
    same = inner_product_hashes(xv, n, t, coins, key) == inner_product_hashes(yv, n, t, coins, key)
    return HashResult(same, t, 1)


# walk over block-prefix boundaries


@dataclass
class CheckingWalk:
    """Search state over prefix boundaries ``0..m``.

    ``lo`` is believed equal, ``hi`` is known to differ. ``query`` returns the
    boundary to test next; ``update`` takes the verdict.
    """

    m: int
    lo: int = 0
    hi: int = 0
    stack: list = field(default_factory=list)

    def __post_init__(self):
        if not self.hi:
            self.hi = self.m

    def query(self) -> int:
        if self.hi - self.lo > 1:
            return (self.lo + self.hi) // 2
        return self.lo

    def update(self, equal: bool) -> None:
        q = self.query()
        if self.hi - self.lo > 1:
            if equal:
                self.stack.append(self.lo)
                self.lo = q
            else:
                self.hi = q
        elif not equal:
            # the believed-equal end actually differs: step back up the tree
            self.hi = self.lo
            self.lo = self.stack.pop() if self.stack else 0

    @property
    def answer(self) -> int:
        return self.lo


@dataclass(frozen=True)
class _Blocks:
    n: int
    m: int

    @property
    def length(self) -> int:
        return -(-self.n // self.m)

    @property
    def padded(self) -> int:
        return self.length * self.m

    def value(self, bits: str) -> int:
        return int(bits, 2) << (self.padded - self.n) if bits else 0

    def prefix(self, v: int, boundary: int) -> tuple[int, int]:
        """Top ``boundary`` blocks of a padded value, and their bit count."""
        width = boundary * self.length
        return v >> (self.padded - width), width

    def block(self, v: int, index: int) -> str:
        width = self.length
        shift = self.padded - (index + 1) * width
        return format((v >> shift) & ((1 << width) - 1), f"0{width}b")


def noisy_find_first_diff(
    x: str,
    y: str,
    m: int,
    eps: float = DEFAULT_EPS,
    coins: StreamCoins | None = None,
    c1: int = DEFAULT_C1,
    t: int | None = None,
    known_unequal: bool = False,
) -> int | None:
    """First block index (0-based) where x and y differ, or ``None`` if they look equal."""
    if len(x) != len(y):
        raise DomainError("length mismatch")
    if m < 1 or m & (m - 1):
        raise DomainError("block count must be a power of two")
    coins = coins or StreamCoins(0)
    s = m.bit_length() - 1
    steps = c1 * s
    t = t if t is not None else hash_width(steps, eps)
    blocks = _Blocks(len(x), m)
    xv, yv = blocks.value(x), blocks.value(y)
    if not known_unequal:
        xp, w = blocks.prefix(xv, m)
        yp, _ = blocks.prefix(yv, m)
        if inner_product_hashes(xp, w, t, coins, "whole") == inner_product_hashes(yp, w, t, coins, "whole"):
            return None
    if m == 1:
        return 0
    walk = CheckingWalk(m)
    for step in range(steps):
        q = walk.query()
        xp, w = blocks.prefix(xv, q)
        yp, _ = blocks.prefix(yv, q)
        key = ("walk", step)
        walk.update(inner_product_hashes(xp, w, t, coins, key) == inner_product_hashes(yp, w, t, coins, key))
    return walk.answer


# budgeted protocol


def hash_width(tests: int, eps: float) -> int:
    """Smallest ``t`` with ``(tests + 1) 2^-t <= eps`` (union bound over all tests)."""
    return max(1, math.ceil(math.log2((tests + 1) / eps)))


@dataclass(frozen=True)
class BudgetConfig:
    n: int
    b: int
    t: int
    s: int
    eps: float = DEFAULT_EPS
    c1: int = DEFAULT_C1

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be positive")
        if self.s < 1:
            raise DomainError("s must be at least 1")
        if self.t < 1 or self.c1 < 1:
            raise DomainError("t and c1 must be positive")
        if self.bob_max > self.b:
            raise DomainError(
                f"Bob would send {self.bob_max} bits (1 + c1*s) but the budget is b={self.b}"
            )

    @property
    def m(self) -> int:
        return 1 << self.s

    @property
    def block_length(self) -> int:
        return -(-self.n // self.m)

    @property
    def walk_steps(self) -> int:
        return self.c1 * self.s

    @property
    def bob_max(self) -> int:
        return 1 + self.walk_steps

    @property
    def alice_max(self) -> int:
        return (self.walk_steps + 1) * self.t + self.block_length

    @property
    def hash_overhead(self) -> int:
        return (self.walk_steps + 1) * self.t

    @classmethod
    def derive(
        cls,
        n: int,
        b: int,
        eps: float = DEFAULT_EPS,
        c1: int = DEFAULT_C1,
        t: int | None = None,
        s: int | None = None,
    ) -> "BudgetConfig":
        """Pick ``s`` (and ``t`` unless given) minimising Alice's worst case within the budget."""
        if s is not None:
            return cls(n, b, t if t is not None else hash_width(c1 * s, eps), s, eps, c1)
        s_max = min((b - 1) // c1, max(1, math.ceil(math.log2(n))))
        if s_max < 1:
            raise DomainError(f"budget b={b} leaves no room for a search step (need b >= {1 + c1})")
        best = None
        for cand in range(1, s_max + 1):
            cfg = cls(n, b, t if t is not None else hash_width(c1 * cand, eps), cand, eps, c1)
            if best is None or cfg.alice_max < best.alice_max:
                best = cfg
        return best


def _replay(config: BudgetConfig, history) -> CheckingWalk:
    walk = CheckingWalk(config.m)
    # history: whole-string hash, verdict, then (hash, verdict) pairs
    for i in range(3, len(history), 2):
        walk.update(history[i][1] == "1")
    return walk


def gt_tradeoff_protocol(config: BudgetConfig) -> ProtocolSpec:
    blocks = _Blocks(config.n, config.m)
    t, steps = config.t, config.walk_steps

    def test_key(step: int):
        return "whole" if step < 0 else ("walk", step)

    def alice(v: View):
        coins: StreamCoins = v.shared
        xv = blocks.value(v.input)
        done = (len(v.history) - 1) // 2 if v.history else -1
        if not v.history:
            xp, w = blocks.prefix(xv, config.m)
            return Message(format(inner_product_hashes(xp, w, t, coins, "whole"), f"0{t}b"))
        walk = _replay(config, v.history)
        if done < steps:
            xp, w = blocks.prefix(xv, walk.query())
            return Message(format(inner_product_hashes(xp, w, t, coins, test_key(done)), f"0{t}b"))
        return Message(blocks.block(xv, walk.answer))

    def bob(v: View):
        coins: StreamCoins = v.shared
        yv = blocks.value(v.input)
        step = len(v.history) // 2 - 1
        if step < 0:
            yp, w = blocks.prefix(yv, config.m)
            equal = v.history[-1][1] == format(inner_product_hashes(yp, w, t, coins, "whole"), f"0{t}b")
            return Output(1, "1") if equal else Message("0")
        if step < steps:
            walk = _replay(config, v.history[:-1])
            yp, w = blocks.prefix(yv, walk.query())
            mine = format(inner_product_hashes(yp, w, t, coins, test_key(step)), f"0{t}b")
            return Message("1" if v.history[-1][1] == mine else "0")
        walk = _replay(config, v.history[:-1])
        x_block, y_block = v.history[-1][1], blocks.block(yv, walk.answer)
        return Output(int(x_block >= y_block))

    turns = [("A", t), ("B", 1)] + [("A", t), ("B", 1)] * steps + [("A", config.block_length), ("B", 0)]
    return ProtocolSpec(
        alice,
        bob,
        schedule_of(*turns),
        coins=CoinDomains(shared_stream=True),
        name=f"gt_tradeoff_n{config.n}_b{config.b}",
    )


def search_answer(config: BudgetConfig, history) -> int | None:
    """Block located by the walk in a finished transcript (``None`` on early exit)."""
    if len(history) < 3:
        return None
    return _replay(config, history[: 2 + 2 * config.walk_steps]).answer


def first_diff_block(x: str, y: str, m: int) -> int | None:
    blocks = _Blocks(len(x), m)
    for i in range(m):
        if blocks.block(blocks.value(x), i) != blocks.block(blocks.value(y), i):
            return i
    return None


# input distributions


def _bits(arr) -> str:
    return "".join("1" if int(b) else "0" for b in arr)


def sample_hard_gt(n: int, rng: np.random.Generator) -> tuple[str, str]:
    """``J`` uniform on ``1..n/2``; ``x, y`` uniform subject to equal first ``J-1`` bits."""
    if n < 2:
        raise DomainError("hard distribution needs n >= 2")
    j = int(rng.integers(1, n // 2 + 1))
    x = rng.integers(0, 2, size=n)
    tail = rng.integers(0, 2, size=n - j + 1)
    return _bits(x), _bits(x[: j - 1]) + _bits(tail)


def sample_uniform_pair(n: int, rng: np.random.Generator) -> tuple[str, str]:
    return _bits(rng.integers(0, 2, size=n)), _bits(rng.integers(0, 2, size=n))


def sample_mixture(n: int, rng: np.random.Generator) -> tuple[str, str]:
    """Even mixture of the hard distribution and independent uniform pairs."""
    if rng.integers(0, 2):
        return sample_uniform_pair(n, rng)
    return sample_hard_gt(n, rng)


def gt_hard_table(n: int, include_y: bool = True) -> ProbTable:
    """Exact hard distribution over ``(x, y, J)``; with ``include_y=False`` Bob's input is a constant."""
    if n < 2 or n % 2:
        raise DomainError("exact hard distribution needs even n >= 2")
    half = n // 2
    atoms = {}
    for j in range(1, half + 1):
        free = n - j + 1
        for xv in range(1 << n):
            x = format(xv, f"0{n}b")
            if not include_y:
                atoms[(x, "", j)] = 1.0 / (half * (1 << n))
                continue
            w = 1.0 / (half * (1 << n) * (1 << free))
            for tv in range(1 << free):
                atoms[(x, x[: j - 1] + format(tv, f"0{free}b"), j)] = w
    return ProbTable.from_atoms(("x", "y", "J"), atoms)


# sweep


SWEEP_FIELDS = (
    "n",
    "b",
    "trials",
    "alice_bits_mean",
    "alice_bits_max",
    "bob_bits_mean",
    "bob_bits_max",
    "rounds_mean",
    "error_rate",
    "seed",
)


@dataclass(frozen=True)
class SweepRow:
    n: int
    b: int
    trials: int
    alice_bits_mean: float
    alice_bits_max: int
    bob_bits_mean: float
    bob_bits_max: int
    rounds_mean: float
    error_rate: float
    seed: int

    def as_dict(self) -> dict:
        return asdict(self)


def run_budget(config: BudgetConfig, trials: int, seed: int, sampler=sample_mixture) -> SweepRow:
    protocol = gt_tradeoff_protocol(config)
    a_tot = b_tot = r_tot = 0
    a_max = b_max = errors = 0
    for i in range(trials):
        x, y = sampler(config.n, stream(seed, "input", i))
        res = run(protocol, (x, y), seed, task=gt, trial=i)
        c = res.cost
        if c.bits_b_to_a > config.b:
            raise ProtocolError(f"trial {i}: Bob sent {c.bits_b_to_a} bits over budget {config.b}")
        a_tot += c.bits_a_to_b
        b_tot += c.bits_b_to_a
        r_tot += c.rounds
        a_max = max(a_max, c.bits_a_to_b)
        b_max = max(b_max, c.bits_b_to_a)
        errors += not c.correct
    return SweepRow(
        config.n, config.b, trials, a_tot / trials, a_max, b_tot / trials, b_max, r_tot / trials, errors / trials, seed
    )


def sweep(
    n: int,
    budgets: Sequence[int],
    trials: int,
    seed: int,
    eps: float = DEFAULT_EPS,
    c1: int = DEFAULT_C1,
) -> list[SweepRow]:
    """One row per budget; trial ``i`` sees the same inputs under every budget."""
    if trials < 1:
        raise DomainError("trials must be at least 1")
    return [run_budget(BudgetConfig.derive(n, b, eps, c1), trials, seed) for b in budgets]


# exact one-way information bound


@dataclass(frozen=True)
class InfoCheck:
    name: str
    c: int
    lhs: float
    rhs: float
    passed: bool


def _message_length(protocol: ProtocolSpec) -> int:
    turns = [t for t in protocol.schedule if t.length]
    if len(turns) > 1 or any(t.speaker != "A" for t in turns):
        raise DomainError("expected a single message from Alice")
    return turns[0].length if turns else 0


def oneway_info_check(
    protocol: ProtocolSpec, n: int, tol: float = 1e-10, include_y: bool = False
) -> InfoCheck:
    """``I(C B ; X_J | X_<J, J)`` under the hard distribution against ``4c/n``.

    ``B`` is everything Bob holds before the message (shared and private
    coins). Bob's input does not enter the quantity, so by default it is held
    constant to keep the enumeration small; ``include_y`` enumerates it too.
    """
    if n > 8:
        raise DomainError("exact check limited to n <= 8")
    c = _message_length(protocol)
    joint = exact_joint(protocol, gt_hard_table(n, include_y))
    joint = joint.derive(
        C=lambda r: r["transcript"][0][1] if r["transcript"] else "",
        B=lambda r: (r["shared"], r["private_b"]),
        XJ=lambda r: r["x"][r["J"] - 1],
        Xlt=lambda r: r["x"][: r["J"] - 1],
    )
    lhs = classical_measures(joint, "cmi(C,B;XJ|Xlt,J)")
    rhs = 4 * c / n
    return InfoCheck(protocol.name, c, lhs, rhs, lhs <= rhs + tol)


def oneway_family(n: int, seed: int = 0, random_tables: int = 4) -> Iterator[ProtocolSpec]:
    """One-way protocols for the exact check: projections, prefixes, parities,
    seeded lookup tables and shared-coin randomised messages."""
    yield one_message_protocol(lambda x, s: "", 0, name="constant")
    for i in range(n):
        yield one_message_protocol(lambda x, s, i=i: x[i], 1, name=f"bit_{i}")
    for c in range(2, n + 1):
        yield one_message_protocol(lambda x, s, c=c: x[:c], c, name=f"prefix_{c}")
    yield one_message_protocol(lambda x, s: str(x.count("1") & 1), 1, name="parity")
    yield one_message_protocol(
        lambda x, s: str(x[: n // 2].count("1") & 1) + str(x[n // 2 :].count("1") & 1), 2, name="half_parities"
    )
    for r in range(random_tables):
        rng = stream(seed, "oneway_table", n, r)
        c = 1 + r % 2
        table = rng.integers(0, 1 << c, size=1 << n)
        yield one_message_protocol(
            lambda x, s, table=table, c=c: format(int(table[int(x, 2)]), f"0{c}b"), c, name=f"table_{r}_c{c}"
        )
    idx = tuple(range(n))
    yield one_message_protocol(
        lambda x, s: x[s], 1, coins=CoinDomains(shared=idx), name="shared_index_bit"
    )
    masks = tuple(range(1 << min(n, 4)))
    yield one_message_protocol(
        lambda x, s: str(_parity(int(x, 2) & s)), 1, coins=CoinDomains(shared=masks), name="shared_mask_parity"
    )
    yield one_message_protocol(
        lambda x, s: format(int(x[:2], 2) ^ s, "02b"), 2, coins=CoinDomains(shared=(0, 1, 2, 3)), name="one_time_pad"
    )
