"""Engine for classical two-party public-coin protocols.

A protocol is two party functions plus a fixed schedule of turns. On each turn
the scheduled speaker sees a :class:`View` and returns either a
:class:`Message` of exactly the declared length or, if it is the output party,
an :class:`Output` (optionally carrying one last message). Bits are tallied
per direction so ``bits_a_to_b`` and ``bits_b_to_a`` are unambiguous.

Randomness comes in two flavours. Declared finite coin domains (uniform over
the listed values) make a protocol enumerable by :func:`exact_joint`.
Alternatively the shared coins can be a :class:`StreamCoins`, a keyed
pseudo-random function that both parties read by label.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from itertools import product
from typing import Any, Callable, Hashable, Iterable, Sequence

import numpy as np

from .errors import DomainError, MaxRoundsError, ProtocolError, SizeError
from .qmath.prob import ProbTable
from .rng import prf_bits, stream

DEFAULT_ENUM_CAP = 1 << 21

DIRECTION = {"A": "AB", "B": "BA"}


@dataclass(frozen=True)
class Message:
    bits: str


@dataclass(frozen=True)
class Output:
    value: Any
    bits: str = ""


@dataclass(frozen=True)
class Turn:
    speaker: str
    length: int

    def __post_init__(self):
        if self.speaker not in DIRECTION:
            raise DomainError(f"speaker must be 'A' or 'B', got {self.speaker!r}")
        if self.length < 0:
            raise DomainError("turn length must be non-negative")


@dataclass(frozen=True)
class StreamCoins:
    """Shared random bits addressed by label; identical for both parties."""

    seed: int

    def bits(self, key: Hashable, n: int) -> int:
        return prf_bits(self.seed, key, n)


@dataclass(frozen=True)
class CoinDomains:
    """Finite uniform coin domains; ``None`` means the party has no such coins.

    ``shared_stream`` replaces the shared domain by :class:`StreamCoins`, which
    makes the protocol runnable but not enumerable.
    """

    shared: tuple | None = None
    private_a: tuple | None = None
    private_b: tuple | None = None
    shared_stream: bool = False

    def domain(self, role: str) -> tuple:
        d = getattr(self, role)
        return (None,) if d is None else tuple(d)


@dataclass(frozen=True)
class View:
    """What a party sees when it is asked to act."""

    input: Any
    private: Any
    shared: Any
    history: tuple[tuple[str, str], ...]
    round: int
    length: int


Party = Callable[[View], "Message | Output"]


@dataclass(frozen=True)
class ProtocolSpec:
    alice: Party
    bob: Party
    schedule: tuple[Turn, ...]
    output_party: str = "B"
    coins: CoinDomains = field(default_factory=CoinDomains)
    name: str = "protocol"

    def __post_init__(self):
        object.__setattr__(self, "schedule", tuple(self.schedule))
        if self.output_party not in DIRECTION:
            raise DomainError("output party must be 'A' or 'B'")

    @property
    def max_rounds(self) -> int:
        return len(self.schedule)

    @property
    def exact_mode(self) -> bool:
        return not self.coins.shared_stream


def schedule_of(*turns: tuple[str, int]) -> tuple[Turn, ...]:
    return tuple(Turn(s, n) for s, n in turns)


@dataclass(frozen=True)
class Event:
    round: int
    dir: str
    bits: str


@dataclass(frozen=True)
class Transcript:
    events: tuple[Event, ...]

    def bits(self, direction: str) -> int:
        return sum(len(e.bits) for e in self.events if e.dir == direction)

    def key(self) -> tuple[tuple[str, str], ...]:
        return tuple((e.dir, e.bits) for e in self.events)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(asdict(e), sort_keys=False) + "\n" for e in self.events)

    @classmethod
    def from_jsonl(cls, text: str) -> "Transcript":
        return cls(tuple(Event(**json.loads(line)) for line in text.splitlines() if line.strip()))


@dataclass(frozen=True)
class CostReport:
    bits_a_to_b: int
    bits_b_to_a: int
    rounds: int
    output: Any = None
    correct: bool | None = None

    @classmethod
    def of(cls, transcript: Transcript, output: Any, correct: bool | None = None) -> "CostReport":
        return cls(transcript.bits("AB"), transcript.bits("BA"), len(transcript.events), output, correct)

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RunResult:
    output: Any
    transcript: Transcript
    cost: CostReport


def _act(party: Party, view: View):
    fn = getattr(party, "next_action", party)
    return fn(view)


def execute(protocol: ProtocolSpec, inputs: tuple[Any, Any], shared, private_a, private_b) -> RunResult:
    """One run with all randomness fixed."""
    x, y = inputs
    history: list[tuple[str, str]] = []
    events: list[Event] = []
    for r, turn in enumerate(protocol.schedule):
        if turn.speaker == "A":
            party, local, private = protocol.alice, x, private_a
        else:
            party, local, private = protocol.bob, y, private_b
        action = _act(party, View(local, private, shared, tuple(history), r, turn.length))
        if isinstance(action, Output):
            if turn.speaker != protocol.output_party:
                raise ProtocolError(f"party {turn.speaker} produced an output at round {r}")
            bits = action.bits
        elif isinstance(action, Message):
            bits = action.bits
        else:
            raise ProtocolError(f"round {r}: party returned {type(action).__name__}, expected Message or Output")
        if bits:
            if len(bits) != turn.length or set(bits) - {"0", "1"}:
                raise ProtocolError(
                    f"round {r}: message {bits!r} does not match declared length {turn.length}"
                )
            history.append((DIRECTION[turn.speaker], bits))
            events.append(Event(r, DIRECTION[turn.speaker], bits))
        elif isinstance(action, Message) and turn.length:
            raise ProtocolError(f"round {r}: empty message where {turn.length} bits are declared")
        if isinstance(action, Output):
            transcript = Transcript(tuple(events))
            return RunResult(action.value, transcript, CostReport.of(transcript, action.value))
    raise MaxRoundsError(f"schedule of {protocol.max_rounds} turns exhausted without output")


def _draw(domain: tuple, rng: np.random.Generator):
    return domain[int(rng.integers(len(domain)))] if len(domain) > 1 else domain[0]


def run(
    protocol: ProtocolSpec,
    inputs: tuple[Any, Any],
    seed: int,
    task: Callable[[Any, Any], Any] | None = None,
    trial: int | None = None,
) -> RunResult:
    """Run once; every coin is a deterministic function of ``(seed, trial)``."""
    keys = () if trial is None else (trial,)
    coins = protocol.coins
    if coins.shared_stream:
        shared = StreamCoins(int(stream(seed, "shared", *keys).integers(1 << 62)))
    else:
        shared = _draw(coins.domain("shared"), stream(seed, "shared", *keys))
    private_a = _draw(coins.domain("private_a"), stream(seed, "private_a", *keys))
    private_b = _draw(coins.domain("private_b"), stream(seed, "private_b", *keys))
    result = execute(protocol, inputs, shared, private_a, private_b)
    if task is not None:
        correct = bool(result.output == task(*inputs))
        cost = CostReport.of(result.transcript, result.output, correct)
        result = RunResult(result.output, result.transcript, cost)
    return result


@dataclass(frozen=True)
class MeanCost:
    bits_a_to_b: float
    bits_b_to_a: float
    rounds: float


@dataclass(frozen=True)
class ErrorEstimate:
    error_rate: float
    trials: int
    mean: MeanCost
    max: CostReport


def estimate_error(
    protocol: ProtocolSpec,
    task: Callable[[Any, Any], Any],
    sampler: Callable[[np.random.Generator], tuple[Any, Any]],
    trials: int,
    seed: int,
) -> ErrorEstimate:
    """Monte Carlo error rate; trial ``i`` uses input and coin streams keyed by ``i``."""
    if trials < 1:
        raise DomainError("trials must be at least 1")
    errors = 0
    tot = np.zeros(3)
    mx = np.zeros(3, dtype=int)
    for i in range(trials):
        inputs = sampler(stream(seed, "input", i))
        try:
            res = run(protocol, inputs, seed, task=task, trial=i)
        except ProtocolError as exc:
            raise type(exc)(f"trial {i}: {exc}") from exc
        c = res.cost
        errors += not c.correct
        vals = np.array([c.bits_a_to_b, c.bits_b_to_a, c.rounds])
        tot += vals
        mx = np.maximum(mx, vals)
    mean = MeanCost(*(float(v) for v in tot / trials))
    return ErrorEstimate(errors / trials, trials, mean, CostReport(int(mx[0]), int(mx[1]), int(mx[2])))


def exact_joint(
    protocol: ProtocolSpec,
    input_dist: ProbTable,
    cap: int = DEFAULT_ENUM_CAP,
) -> ProbTable:
    """Joint law of inputs, coins, transcript and output by full enumeration.

    ``input_dist`` must contain variables ``x`` and ``y``; any further input
    variables (a hidden index, say) are carried through. The result adds
    ``shared``, ``private_a``, ``private_b``, ``transcript`` (tuple of
    ``(dir, bits)``) and ``output``.
    """
    if not protocol.exact_mode:
        raise DomainError("exact enumeration needs finite declared coin domains")
    ix, iy = input_dist.index("x"), input_dist.index("y")
    domains = [protocol.coins.domain(r) for r in ("shared", "private_a", "private_b")]
    coin_mass = 1.0 / math.prod(len(d) for d in domains)
    estimated = len(input_dist) * math.prod(len(d) for d in domains)
    if estimated > cap:
        raise SizeError(f"enumeration of {estimated} atoms exceeds cap {cap}", estimated=estimated)
    atoms: dict[tuple, float] = {}
    for a, w in input_dist.items():
        for coins in product(*domains):
            res = execute(protocol, (a[ix], a[iy]), *coins)
            key = a + coins + (res.transcript.key(), res.output)
            atoms[key] = atoms.get(key, 0.0) + w * coin_mass
    names = input_dist.names + ("shared", "private_a", "private_b", "transcript", "output")
    supports = list(input_dist.supports) + [tuple(d) for d in domains]
    return ProbTable.from_atoms(names, atoms, supports=supports + [_support(atoms, -2), _support(atoms, -1)])


def _support(atoms: dict, i: int) -> tuple:
    vals = list(dict.fromkeys(k[i] for k in atoms))
    try:
        return tuple(sorted(vals))
    except TypeError:
        return tuple(sorted(vals, key=repr))


def exact_error(protocol: ProtocolSpec, input_dist: ProbTable, task: Callable[[Any, Any], Any]) -> float:
    joint = exact_joint(protocol, input_dist)
    return joint.prob(lambda r: r["output"] != task(r["x"], r["y"]))


def one_message_protocol(
    message: Callable[[Any, Any], str],
    length: int,
    decide: Callable[[Any, str, Any], Any] = lambda y, m, shared: m,
    coins: CoinDomains | None = None,
    name: str = "one_message",
) -> ProtocolSpec:
    """Alice sends ``message(x, shared)`` (``length`` bits); Bob outputs ``decide(y, m, shared)``."""

    def alice(v: View):
        return Message(message(v.input, v.shared))

    def bob(v: View):
        return Output(decide(v.input, v.history[-1][1] if v.history else "", v.shared))

    return ProtocolSpec(alice, bob, schedule_of(("A", length), ("B", 0)), coins=coins or CoinDomains(), name=name)
