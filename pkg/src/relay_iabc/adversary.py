"""Byzantine behaviours.

Every strategy is a deterministic function of (seed, node id, iteration,
recipient) and of the traffic the node has observed. Byzantine nodes hold
their own signing keys, every published verification key, and a full view
of honest messages routed through them, but no honest signing secret.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from .protocol import EMPTY, Message, SignedEntry, signed_entry
from .signatures import TAG_SIZE, KeyPair, Payload

KINDS = ("RandomRange", "Equivocator", "Forger", "Replayer", "Silent", "Extreme")

_U64 = (1 << 64) - 1

# allowed parameters and their defaults; None means "taken from the run's init range"
_PARAMS: dict[str, dict[str, Any]] = {
    "RandomRange": {"lo": None, "hi": None, "offset": 5.0},
    "Equivocator": {"low": None, "high": None},
    "Forger": {"lo": None, "hi": None, "per_message": 1},
    "Replayer": {"lo": None, "hi": None},
    "Silent": {},
    "Extreme": {"value": None, "margin": 10.0},
}


@dataclass(frozen=True)
class ByzantineStrategy:
    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown adversary kind {self.kind!r}; expected one of {KINDS}")
        unknown = set(self.params) - set(_PARAMS[self.kind])
        if unknown:
            raise ValueError(f"unknown parameters for {self.kind}: {sorted(unknown)}")

    @classmethod
    def from_dict(cls, spec: Mapping[str, Any]) -> "ByzantineStrategy":
        spec = dict(spec)
        if "kind" not in spec:
            raise ValueError("adversary entry needs a 'kind'")
        kind = spec.pop("kind")
        return cls(kind, spec)

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params}

    def resolved(self, init_range: Sequence[float]) -> dict[str, Any]:
        """Parameters with defaults filled in from the honest initial range."""
        lo, hi = float(init_range[0]), float(init_range[1])
        out = dict(_PARAMS[self.kind])
        out.update(self.params)
        for k in ("lo", "low"):
            if k in out and out[k] is None:
                out[k] = lo
        for k in ("hi", "high"):
            if k in out and out[k] is None:
                out[k] = hi
        if self.kind == "Extreme" and out["value"] is None:
            out["value"] = hi + float(out["margin"])
        return out


def recipient_offset(seed: int, node_id: int, recipient: int, magnitude: float) -> float:
    """Deterministic per-recipient perturbation in [-magnitude, magnitude]."""
    raw = hashlib.blake2b(struct.pack(">QII", seed & _U64, node_id, recipient),
                          digest_size=8, person=b"relayiabc-off").digest()
    u = int.from_bytes(raw, "big") / float(1 << 64)
    return magnitude * (2.0 * u - 1.0)


class ByzantineNode:
    """A Byzantine participant running one strategy for a whole run."""

    def __init__(self, node_id: int, strategy: ByzantineStrategy, keys: KeyPair, seed: int,
                 honest_ids: Sequence[int], m: int, init_range: Sequence[float] = (-110.0, 110.0)):
        self.id = node_id
        self.strategy = strategy
        self.kind = strategy.kind
        self.params = strategy.resolved(init_range)
        self.keys = keys
        self.seed = seed & _U64
        self.honest_ids = tuple(honest_ids)
        self.m = m
        self.forged = 0
        self.replayed = 0
        # first and latest verified-looking honest entry seen per origin
        self.first_seen: dict[int, SignedEntry] = {}
        self.last_seen: dict[int, SignedEntry] = {}
        self._draw_iter: Optional[int] = None
        self._draw = 0.0
        self._cached: Optional[Message] = None
        self._offsets: dict[int, float] = {}

    def observe(self, msg: Message) -> None:
        for e in msg:
            o = e.payload.origin
            if o in self.first_seen:
                self.last_seen[o] = e
            else:
                self.first_seen[o] = self.last_seen[o] = e

    def _uniform(self, iteration: int) -> float:
        """One draw from [lo, hi) per iteration, shared by all recipients."""
        if self._draw_iter != iteration:
            rng = np.random.default_rng([self.seed, self.id, iteration])
            lo, hi = self.params["lo"], self.params["hi"]
            self._draw = lo + (hi - lo) * float(rng.random())
            self._draw_iter = iteration
            self._cached = None
        return self._draw

    def _noise(self, iteration: int, recipient: int, k: int) -> bytes:
        return hashlib.blake2b(struct.pack(">QIQII", self.seed, self.id, iteration, recipient, k),
                               digest_size=8 + TAG_SIZE, person=b"relayiabc-forge").digest()

    def outgoing(self, iteration: int, recipient: int, phase: int) -> Message:
        """The message this node sends to ``recipient`` during ``iteration``."""
        kind = self.kind
        if kind == "Silent":
            return EMPTY
        if kind == "Extreme":
            return Message([signed_entry(self.keys, phase, self.params["value"])])
        if kind == "RandomRange":
            off = self._offsets.get(recipient)
            if off is None:
                off = recipient_offset(self.seed, self.id, recipient, float(self.params["offset"]))
                self._offsets[recipient] = off
            return Message([signed_entry(self.keys, phase, self._uniform(iteration) + off)])
        if kind == "Equivocator":
            v = self.params["low"] if recipient % 2 == 0 else self.params["high"]
            return Message([signed_entry(self.keys, phase, v)])
        if kind == "Replayer":
            self._uniform(iteration)
            if self._cached is None:
                own = signed_entry(self.keys, phase, self._draw)
                stale = [e for o, e in sorted(self.first_seen.items())
                         if o != self.id and e.payload.phase < phase]
                self._cached = Message([own] + stale)
            self.replayed += len(self._cached) - 1
            return self._cached
        if kind == "Forger":
            return Message(self._forge(iteration, recipient, phase))
        raise AssertionError(kind)

    def _forge(self, iteration: int, recipient: int, phase: int) -> list[SignedEntry]:
        if not self.honest_ids:
            return []
        lo, hi = self.params["lo"], self.params["hi"]
        out = []
        for k in range(int(self.params["per_message"])):
            noise = self._noise(iteration, recipient, k)
            u = int.from_bytes(noise[:8], "big") / float(1 << 64)
            origin = self.honest_ids[(iteration * self.m + recipient + k) % len(self.honest_ids)]
            seen = self.last_seen.get(origin)
            if seen is not None and (iteration + k) % 2 == 0:
                # splice: a genuine tag over an altered payload
                fake = Payload(origin, phase, seen.payload.value + 1.0 + u)
                tag = seen.tag
            else:
                fake = Payload(origin, phase, lo + (hi - lo) * u)
                tag = noise[8:]
            out.append(SignedEntry(fake, tag))
        self.forged += len(out)
        return out
