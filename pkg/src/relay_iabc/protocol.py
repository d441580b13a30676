"""Honest node state machines: Relay-IABC and the single-hop IABC baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

from .signatures import KeyDirectory, KeyPair, Payload, sign


class SignedEntry(NamedTuple):
    payload: Payload
    tag: bytes

    @property
    def origin(self) -> int:
        return self.payload.origin

    @property
    def phase(self) -> int:
        return self.payload.phase

    @property
    def value(self) -> float:
        return self.payload.value


def signed_entry(kp: KeyPair, phase: int, value: float) -> SignedEntry:
    p = Payload(kp.node_id, phase, float(value))
    return SignedEntry(p, sign(kp, p))


class Message:
    """An immutable batch of signed entries, as sent in one iteration.

    The same object may be delivered to many recipients, so the result of
    screening it (:meth:`screen`) is memoised per (directory, phase bound).
    """

    __slots__ = ("entries", "_screened_key", "_screened")

    def __init__(self, entries: Iterable[SignedEntry] = ()):
        self.entries = tuple(entries)
        self._screened_key = None
        self._screened = None

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, Message) and self.entries == other.entries

    def __hash__(self) -> int:
        return hash(self.entries)

    def __repr__(self) -> str:
        return f"Message({len(self.entries)} entries)"

    def screen(self, directory: KeyDirectory, bound: int):
        """Filter entries for a recipient at phase ``bound``.

        Returns ``(best, rejected, future)``: ``best`` maps origin to the
        first entry with the highest phase tag among those that verify and
        are not from the future; ``rejected`` counts entries failing
        verification (or carrying a non-finite value); ``future`` counts
        verified entries tagged beyond ``bound``.
        """
        key = self._screened_key
        if key is not None and key[0] is directory and key[1] == bound:
            return self._screened
        best: dict[int, SignedEntry] = {}
        rejected = future = 0
        for e in self.entries:
            if not directory.verify_entry(e) or not math.isfinite(e.payload.value):
                rejected += 1
                continue
            ph = e.payload.phase
            if ph > bound:
                future += 1
                continue
            cur = best.get(e.payload.origin)
            if cur is None or ph > cur.payload.phase:
                best[e.payload.origin] = e
        out = (best, rejected, future)
        self._screened_key, self._screened = (directory, bound), out
        return out


EMPTY = Message()


def trim_order(values: Sequence[float], b: int) -> list[int]:
    """Indices of the values kept by the trimmed mean, in ascending sorted order.

    Sorting is stable, so equal values are ordered by position.
    """
    n = len(values)
    if n <= 2 * b:
        raise ValueError(f"trimmed mean needs more than 2b={2 * b} values, got {n}")
    order = sorted(range(n), key=values.__getitem__)
    return order[b:n - b]


def _mean_within(kept: list[float]) -> float:
    mean = math.fsum(kept) / len(kept)
    # the exact mean lies in [min, max]; clamp away rounding at the edges
    return min(max(mean, min(kept)), max(kept))


def trimmed_mean(values: Sequence[float], b: int) -> float:
    """Drop the b lowest and b highest values and average the rest."""
    keep = trim_order(values, b)
    return _mean_within([values[k] for k in keep])


@dataclass
class PhaseUpdate:
    """What one honest node saw and kept at one phase boundary.

    ``values[k] = (origin, value, fresh)`` with ``fresh`` set when the value
    is a verified entry of ``origin`` signed for the phase just ended (always
    set for the baseline, which has no signatures). ``retained`` indexes
    into ``values``.
    """

    node: int
    phase: int
    values: list[tuple[int, float, bool]]
    retained: list[int]
    new_value: float


class RelayNode:
    """Relay-IABC for one honest node.

    Each iteration the node broadcasts every entry it holds, then keeps, per
    origin, the freshest verified entry it has seen. After every D
    iterations it replaces its own value with the trimmed mean of its
    vector, signs it for the next phase and forgets everything else.
    """

    def __init__(self, node_id: int, m: int, b: int, keys: KeyPair, directory: KeyDirectory,
                 D: int, initial_value: float, default_value: float = 0.0):
        if not 0 <= node_id < m:
            raise ValueError(f"node id {node_id} outside [0, {m})")
        if m <= 2 * b:
            raise ValueError(f"m={m} must exceed 2b={2 * b}")
        if D < 1:
            raise ValueError(f"D must be >= 1, got {D}")
        self.id = node_id
        self.m = m
        self.b = b
        self.keys = keys
        self.directory = directory
        self.D = D
        self.default_value = float(default_value)
        self.phase = 0
        self.rejections = 0
        self.future_dropped = 0
        self.entries: list[Optional[SignedEntry]] = [None] * m
        self.entries[node_id] = signed_entry(keys, 0, initial_value)
        self._open = set(range(m)) - {node_id}
        self._outbox: Optional[Message] = None

    @property
    def value(self) -> float:
        return self.entries[self.id].payload.value

    def outgoing(self) -> Message:
        """The message sent to every out-neighbour this iteration."""
        if self._outbox is None:
            self._outbox = Message(e for e in self.entries if e is not None)
        return self._outbox

    def ingest(self, inbox: Sequence[tuple[int, Message]]) -> None:
        """Merge one iteration's deliveries, given as ``(sender, message)`` pairs.

        Candidates for origin j are the stored entry followed by the received
        entries in ascending sender order; the first with the highest phase
        tag wins, so a stored entry is only replaced by a strictly fresher one.
        """
        bound = self.phase
        entries = self.entries
        opened = self._open
        changed = False
        for _, msg in sorted(inbox, key=lambda sm: sm[0]):
            best, rejected, future = msg.screen(self.directory, bound)
            self.rejections += rejected
            self.future_dropped += future
            if not opened:
                continue
            if len(opened) < len(best):
                cands = ((j, best[j]) for j in list(opened) if j in best)
            else:
                cands = ((j, e) for j, e in list(best.items()) if j in opened)
            for j, e in cands:
                cur = entries[j]
                ph = e.payload.phase
                if cur is None or ph > cur.payload.phase:
                    entries[j] = e
                    changed = True
                    if ph == bound:
                        opened.discard(j)
        if changed:
            self._outbox = None

    def phase_update(self) -> PhaseUpdate:
        values = []
        for j, e in enumerate(self.entries):
            if e is None:
                values.append((j, self.default_value, False))
            else:
                values.append((j, e.payload.value, e.payload.phase == self.phase))
        keep = trim_order([v for _, v, _ in values], self.b)
        new = _mean_within([values[k][1] for k in keep])
        record = PhaseUpdate(self.id, self.phase, values, keep, new)
        self.phase += 1
        self.entries = [None] * self.m
        self.entries[self.id] = signed_entry(self.keys, self.phase, new)
        self._open = set(range(self.m)) - {self.id}
        self._outbox = None
        return record


@dataclass
class BaselineNode:
    """Single-hop IABC: trimmed mean over own value and in-neighbours' values every iteration."""

    id: int
    value: float
    b: int
    last: Optional[PhaseUpdate] = field(default=None, repr=False)

    def step(self, received: Sequence[tuple[int, float]], iteration: int = 0) -> PhaseUpdate:
        pool = [(self.id, self.value, True)] + [(s, float(v), True) for s, v in received]
        pool.sort(key=lambda x: x[0])
        if len(pool) > 2 * self.b:
            keep = trim_order([v for _, v, _ in pool], self.b)
            new = _mean_within([pool[k][1] for k in keep])
        else:
            keep = [k for k, (s, _, _) in enumerate(pool) if s == self.id]
            new = self.value
        self.last = PhaseUpdate(self.id, iteration, pool, keep, new)
        self.value = new
        return self.last
