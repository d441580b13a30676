import struct

from hypothesis import given
from hypothesis import strategies as st

from relay_iabc.adversary import ByzantineNode, ByzantineStrategy
from relay_iabc.protocol import Message, SignedEntry, signed_entry
from relay_iabc.signatures import KeyDirectory, Payload, keygen, sign, verify

payloads = st.builds(
    Payload,
    st.integers(0, 2**32 - 1),
    st.integers(0, 2**64 - 1),
    st.floats(allow_nan=False),
)


def test_encoding_is_20_bytes_big_endian():
    raw = Payload(1, 2, 1.5).encode()
    assert len(raw) == 20
    assert raw == b"\x00\x00\x00\x01" + b"\x00" * 7 + b"\x02" + struct.pack(">d", 1.5)
    assert Payload.decode(raw) == Payload(1, 2, 1.5)


def test_keygen_deterministic_and_distinct():
    assert keygen(5, 0) == keygen(5, 0)
    assert keygen(5, 0).verification_key != keygen(5, 1).verification_key
    assert keygen(5, 0).verification_key != keygen(6, 0).verification_key
    assert keygen(5, 0).signing_secret != keygen(5, 0).verification_key


def test_sign_verify_examples():
    kp0, kp1 = keygen(1, 0), keygen(1, 1)
    p = Payload(0, 3, 2.25)
    tag = sign(kp0, p)
    assert verify(kp0.verification_key, p, tag)
    assert sign(kp0, p) == tag
    bits = struct.unpack(">Q", struct.pack(">d", 2.25))[0] ^ 1
    flipped = struct.unpack(">d", struct.pack(">Q", bits))[0]
    assert sign(kp0, Payload(0, 3, flipped)) != tag
    assert not verify(kp0.verification_key, p, sign(kp1, p))
    assert not verify(kp0.verification_key, Payload(0, 4, 2.25), tag)


def test_verify_never_raises():
    kp = keygen(1, 0)
    assert not verify(b"unknown", Payload(0, 0, 0.0), b"x" * 32)
    assert not verify(kp.verification_key, Payload(0, 0, 0.0), b"short")
    assert not verify(kp.verification_key, Payload(-1, 0, 0.0), b"x" * 32)
    assert not verify(kp.verification_key, Payload(0, 0, "nan"), b"x" * 32)


@given(payloads)
def test_roundtrip(p):
    kp = keygen(42, 3)
    assert verify(kp.verification_key, p, sign(kp, p))


@given(payloads, st.sampled_from(["origin", "phase", "value"]))
def test_payload_binding(p, field):
    kp = keygen(42, 3)
    tag = sign(kp, p)
    if field == "origin":
        q = p._replace(origin=(p.origin + 1) % 2**32)
    elif field == "phase":
        q = p._replace(phase=(p.phase + 1) % 2**64)
    else:
        bits = struct.unpack(">Q", struct.pack(">d", p.value))[0] ^ 1
        q = p._replace(value=struct.unpack(">d", struct.pack(">Q", bits))[0])
    assert q.encode() != p.encode()
    assert not verify(kp.verification_key, q, tag)


def test_directory_cache_does_not_conflate_signed_zeros():
    kp = keygen(0, 0)
    d = KeyDirectory({0: kp.verification_key})
    p = Payload(0, 0, 0.0)
    good = SignedEntry(p, sign(kp, p))
    assert d.verify_entry(good)
    assert not d.verify_entry(SignedEntry(Payload(0, 0, -0.0), good.tag))


def test_forger_never_succeeds_over_1e5_attempts():
    m, honest = 8, list(range(6))
    keys = {i: keygen(9, i) for i in range(m)}
    d = KeyDirectory({i: k.verification_key for i, k in keys.items()})
    forgers = [ByzantineNode(z, ByzantineStrategy("Forger", {"per_message": 10}), keys[z], 9, honest, m)
               for z in (6, 7)]
    # give the forgers genuine honest traffic to splice from
    for f in forgers:
        f.observe(Message(signed_entry(keys[i], 0, float(i)) for i in honest))
    attempts = accepted = 0
    for it in range(2500):
        for f in forgers:
            for r in (0, 3):
                for e in f.outgoing(it, r, 0):
                    attempts += 1
                    assert e.payload.origin in honest
                    accepted += d.verify_entry(e)
    assert attempts >= 100_000
    assert accepted == 0
