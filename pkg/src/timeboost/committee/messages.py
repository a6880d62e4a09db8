"""Broadcast message variants and their bit-exact wire encoding.

Every record is length-prefixed: 4-byte big-endian body length, then a
1-byte variant tag, then fixed-width big-endian integers and 4-byte
length-prefixed byte fields.  Replicas hash and replay these bytes, so the
encoding must round-trip exactly.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from typing import Union

from .crypto import tx_hash
from .timestamps import TimestampTriple


@dataclass(frozen=True)
class EncTx:
    """A submitted transaction: ciphertext, declared priority fee, and for
    delayed-inbox messages the inbox index (else -1)."""

    ciphertext: bytes
    fee: float
    delayed_index: int = -1

    def __post_init__(self) -> None:
        if not self.fee >= 0:
            raise ValueError(f"priority fee must be non-negative, got {self.fee!r}")

    @cached_property
    def h(self) -> bytes:
        return tx_hash(self.ciphertext, self.fee)

    @property
    def is_delayed(self) -> bool:
        return self.delayed_index >= 0


@dataclass(frozen=True)
class LocalTimestamp:
    epoch: int
    sender: int
    enc: EncTx
    stamp: TimestampTriple


@dataclass(frozen=True)
class DecryptionShare:
    epoch: int
    sender: int
    h: bytes
    share: bytes
    adjusted: float


@dataclass(frozen=True)
class BlockSignature:
    epoch: int
    sender: int
    digest: bytes
    sig: bytes


@dataclass(frozen=True)
class BatchSignature:
    epoch: int
    sender: int
    digest: bytes
    sig: bytes


@dataclass(frozen=True)
class NewEpoch:
    # Deliberately not epoch-tagged: it is what moves the epoch forward.
    sender: int
    block_number: int
    txid: bytes


@dataclass(frozen=True)
class Recover:
    sender: int
    nonce: bytes


@dataclass(frozen=True)
class StateHash:
    sender: int
    recovering: int
    nonce: bytes
    digest: bytes


Msg = Union[LocalTimestamp, DecryptionShare, BlockSignature, BatchSignature,
            NewEpoch, Recover, StateHash]

_TAGS = {
    LocalTimestamp: 1,
    DecryptionShare: 2,
    BlockSignature: 3,
    BatchSignature: 4,
    NewEpoch: 5,
    Recover: 6,
    StateHash: 7,
}


def _u16(v: int) -> bytes:
    return struct.pack(">H", v)


def _u64(v: int) -> bytes:
    return struct.pack(">Q", v)


def _i64(v: int) -> bytes:
    return struct.pack(">q", v)


def _f64(v: float) -> bytes:
    return struct.pack(">d", v)


def _lp(data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + data


class _Reader:
    def __init__(self, buf: bytes) -> None:
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise ValueError("truncated message")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def u16(self) -> int:
        return struct.unpack(">H", self.take(2))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]

    def i64(self) -> int:
        return struct.unpack(">q", self.take(8))[0]

    def f64(self) -> float:
        return struct.unpack(">d", self.take(8))[0]

    def lp(self) -> bytes:
        n = struct.unpack(">I", self.take(4))[0]
        return self.take(n)

    def done(self) -> bool:
        return self.pos == len(self.buf)


def _enc_body(msg: Msg) -> bytes:
    if isinstance(msg, LocalTimestamp):
        return (
            _u64(msg.epoch) + _u16(msg.sender)
            + _lp(msg.enc.ciphertext) + _f64(msg.enc.fee) + _i64(msg.enc.delayed_index)
            + _i64(msg.stamp.t_ms) + _u16(msg.stamp.member) + _u64(msg.stamp.seq)
        )
    if isinstance(msg, DecryptionShare):
        return (_u64(msg.epoch) + _u16(msg.sender) + _lp(msg.h) + _lp(msg.share)
                + _f64(msg.adjusted))
    if isinstance(msg, (BlockSignature, BatchSignature)):
        return _u64(msg.epoch) + _u16(msg.sender) + _lp(msg.digest) + _lp(msg.sig)
    if isinstance(msg, NewEpoch):
        return _u16(msg.sender) + _u64(msg.block_number) + _lp(msg.txid)
    if isinstance(msg, Recover):
        return _u16(msg.sender) + _lp(msg.nonce)
    if isinstance(msg, StateHash):
        return _u16(msg.sender) + _u16(msg.recovering) + _lp(msg.nonce) + _lp(msg.digest)
    raise TypeError(f"not a broadcast message: {msg!r}")


def encode_message(msg: Msg) -> bytes:
    body = bytes([_TAGS[type(msg)]]) + _enc_body(msg)
    return struct.pack(">I", len(body)) + body


def decode_message(record: bytes) -> Msg:
    """Decode one length-prefixed record (exactly; trailing bytes reject)."""
    if len(record) < 5:
        raise ValueError("truncated message")
    (length,) = struct.unpack(">I", record[:4])
    if length != len(record) - 4:
        raise ValueError("length prefix mismatch")
    tag = record[4]
    r = _Reader(record[5:])
    if tag == 1:
        epoch, sender = r.u64(), r.u16()
        ct, fee, didx = r.lp(), r.f64(), r.i64()
        stamp = TimestampTriple(t_ms=r.i64(), member=r.u16(), seq=r.u64())
        msg: Msg = LocalTimestamp(epoch, sender, EncTx(ct, fee, didx), stamp)
    elif tag == 2:
        msg = DecryptionShare(r.u64(), r.u16(), r.lp(), r.lp(), r.f64())
    elif tag == 3:
        msg = BlockSignature(r.u64(), r.u16(), r.lp(), r.lp())
    elif tag == 4:
        msg = BatchSignature(r.u64(), r.u16(), r.lp(), r.lp())
    elif tag == 5:
        msg = NewEpoch(r.u16(), r.u64(), r.lp())
    elif tag == 6:
        msg = Recover(r.u16(), r.lp())
    elif tag == 7:
        msg = StateHash(r.u16(), r.u16(), r.lp(), r.lp())
    else:
        raise ValueError(f"unknown message tag {tag}")
    if not r.done():
        raise ValueError("trailing bytes in message")
    return msg
