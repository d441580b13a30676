"""Keyed-hash signatures over (origin, phase, value) payloads.

Tags are HMAC-SHA256 under a per-node secret. Verification keys are
published to every participant; the secrets behind them live only in
``_TRUSTED``, which stands in for verification logic that honest nodes
trust and Byzantine code never reads.
"""

from __future__ import annotations

import hashlib
import hmac
import struct
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple

TAG_SIZE = 32
_U64 = (1 << 64) - 1
_PAYLOAD = struct.Struct(">IQd")

# verification key -> signing secret
_TRUSTED: dict[bytes, bytes] = {}


class Payload(NamedTuple):
    origin: int
    phase: int
    value: float

    def encode(self) -> bytes:
        """Canonical 20-byte form: u32 origin, u64 phase, IEEE-754 double, big-endian."""
        return _PAYLOAD.pack(self.origin, self.phase, self.value)

    @classmethod
    def decode(cls, raw: bytes) -> "Payload":
        return cls(*_PAYLOAD.unpack(raw))


@dataclass(frozen=True)
class KeyPair:
    node_id: int
    signing_secret: bytes = field(repr=False)
    verification_key: bytes


def keygen(master_seed: int, node_id: int) -> KeyPair:
    seed = struct.pack(">QI", master_seed & _U64, node_id)
    secret = hashlib.blake2b(seed, digest_size=32, person=b"relayiabc-sk").digest()
    vk = hashlib.blake2b(secret, digest_size=32, person=b"relayiabc-vk").digest()
    _TRUSTED[vk] = secret
    return KeyPair(node_id, secret, vk)


def sign(kp: KeyPair, p: Payload) -> bytes:
    return hmac.digest(kp.signing_secret, p.encode(), "sha256")


def verify(verification_key: bytes, p: Payload, tag: bytes) -> bool:
    """True iff ``tag`` was produced over exactly ``p`` by the owner of the key. Never raises."""
    secret = _TRUSTED.get(verification_key)
    if secret is None or not isinstance(tag, (bytes, bytearray)) or len(tag) != TAG_SIZE:
        return False
    try:
        raw = p.encode()
    except (struct.error, TypeError):
        return False
    return hmac.compare_digest(hmac.digest(secret, raw, "sha256"), tag)


class KeyDirectory:
    """Published verification keys by node id, with a cache of entries already accepted.

    The cache only remembers successes, so its size is bounded by the number
    of distinct genuine entries; callers may :meth:`clear` it at any time.
    """

    def __init__(self, keys: Mapping[int, bytes]):
        self.keys = dict(keys)
        self._ok: set = set()

    def verify_entry(self, entry) -> bool:
        payload, tag = entry
        try:
            key = (payload.encode(), tag)
            hash(key)
        except (struct.error, TypeError):
            return False
        # keyed on the encoding: 0.0 == -0.0 but their tags differ
        if key in self._ok:
            return True
        vk = self.keys.get(payload.origin)
        if vk is None or not verify(vk, payload, tag):
            return False
        self._ok.add(key)
        return True

    def clear(self) -> None:
        self._ok.clear()
