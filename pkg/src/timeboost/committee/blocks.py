"""Sequencer blocks, their canonical serialization, batches, and compression.

Block wire layout (one record per block):
  delayed-inbox block: 0x00 | timestamp (8B BE) | consumed index (8B BE)
  normal block:        0x01 | timestamp (8B BE) | tx size (4B BE) | tx bytes

Batch bodies are the concatenated block records run through a deterministic
run-length compressor that every replica ships, so batch bytes are
identical across honest replicas.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from functools import cached_property

from .crypto import sha256

DELAYED_KIND = 0
NORMAL_KIND = 1


@dataclass(frozen=True)
class SequencerBlock:
    """One chain entry: exactly one transaction plus chain bookkeeping.

    delayed_index >= 0 marks a block consuming that delayed-inbox message
    (and then delayed_count is one above the predecessor's).  merkle_root
    commits to every (height, delayed_count, payload, timestamp) tuple up
    to and including this block.
    """

    height: int
    delayed_count: int
    payload: bytes
    timestamp: int
    merkle_root: bytes
    delayed_index: int = -1

    @property
    def consumes_delayed(self) -> bool:
        return self.delayed_index >= 0

    def tuple_bytes(self) -> bytes:
        """Canonical bytes of the accumulator leaf tuple."""
        return (
            struct.pack(">QQQ", self.height, self.delayed_count, self.timestamp)
            + struct.pack(">I", len(self.payload))
            + self.payload
        )

    @cached_property
    def digest(self) -> bytes:
        return sha256(b"blk|" + self.tuple_bytes() + self.merkle_root)


def genesis_block(root: bytes) -> SequencerBlock:
    return SequencerBlock(height=0, delayed_count=0, payload=b"", timestamp=0, merkle_root=root)


def serialize_block(block: SequencerBlock) -> bytes:
    if block.consumes_delayed:
        return bytes([DELAYED_KIND]) + struct.pack(">Q", block.timestamp) + struct.pack(">Q", block.delayed_index)
    return (
        bytes([NORMAL_KIND])
        + struct.pack(">Q", block.timestamp)
        + struct.pack(">I", len(block.payload))
        + block.payload
    )


@dataclass(frozen=True)
class WireBlock:
    """A block as read back from a batch body."""

    kind: int
    timestamp: int
    delayed_index: int = -1
    payload: bytes = b""


def parse_block_stream(data: bytes) -> list[WireBlock]:
    out: list[WireBlock] = []
    pos = 0
    while pos < len(data):
        kind = data[pos]
        pos += 1
        if pos + 8 > len(data):
            raise ValueError("truncated block record")
        (ts,) = struct.unpack(">Q", data[pos:pos + 8])
        pos += 8
        if kind == DELAYED_KIND:
            if pos + 8 > len(data):
                raise ValueError("truncated delayed index")
            (idx,) = struct.unpack(">Q", data[pos:pos + 8])
            pos += 8
            out.append(WireBlock(kind=kind, timestamp=ts, delayed_index=idx))
        elif kind == NORMAL_KIND:
            if pos + 4 > len(data):
                raise ValueError("truncated tx size")
            (size,) = struct.unpack(">I", data[pos:pos + 4])
            pos += 4
            if pos + size > len(data):
                raise ValueError("truncated tx bytes")
            out.append(WireBlock(kind=kind, timestamp=ts, payload=data[pos:pos + size]))
            pos += size
        else:
            raise ValueError(f"unknown block kind {kind}")
    return out


# -- deterministic compression ------------------------------------------------
#
# Greedy byte-level run-length coding: runs of >= 4 equal bytes become
# (0x01, length, byte) tokens, everything else is copied in
# (0x00, length, bytes...) literal tokens.  Dictionary-free, so equal
# inputs always give equal outputs.

_RUN_MIN = 4
_CHUNK_MAX = 0xFFFF


def compress(data: bytes) -> bytes:
    out = bytearray()
    lit_start = 0
    i = 0
    n = len(data)

    def flush_literal(end: int) -> None:
        nonlocal lit_start
        while lit_start < end:
            chunk = data[lit_start:min(end, lit_start + _CHUNK_MAX)]
            out.append(0x00)
            out.extend(struct.pack(">H", len(chunk)))
            out.extend(chunk)
            lit_start += len(chunk)

    while i < n:
        j = i
        b = data[i]
        while j < n and data[j] == b:
            j += 1
        run = j - i
        if run >= _RUN_MIN:
            flush_literal(i)
            while run > 0:
                take = min(run, _CHUNK_MAX)
                out.append(0x01)
                out.extend(struct.pack(">H", take))
                out.append(b)
                run -= take
            lit_start = j
        i = j
    flush_literal(n)
    return bytes(out)


def decompress(data: bytes) -> bytes:
    out = bytearray()
    pos = 0
    n = len(data)
    while pos < n:
        token = data[pos]
        pos += 1
        if pos + 2 > n:
            raise ValueError("truncated token length")
        (length,) = struct.unpack(">H", data[pos:pos + 2])
        pos += 2
        if token == 0x00:
            if pos + length > n:
                raise ValueError("truncated literal")
            out += data[pos:pos + length]
            pos += length
        elif token == 0x01:
            if pos + 1 > n:
                raise ValueError("truncated run byte")
            out += bytes([data[pos]]) * length
            pos += 1
        else:
            raise ValueError(f"unknown token {token}")
    return bytes(out)


# -- batches -------------------------------------------------------------------


@dataclass(frozen=True)
class BatchHeader:
    """Header fields copied from the last block in the batch."""

    block_number: int
    merkle_root: bytes
    delayed_count: int
    timestamp: int

    def encode(self) -> bytes:
        return struct.pack(">Q", self.block_number) + self.merkle_root + struct.pack(
            ">QQ", self.delayed_count, self.timestamp
        )


@dataclass(frozen=True)
class Batch:
    header: BatchHeader
    body: bytes

    @cached_property
    def digest(self) -> bytes:
        return sha256(b"batch|" + self.header.encode() + self.body)


def build_batch(blocks: list[SequencerBlock]) -> Batch:
    if not blocks:
        raise ValueError("a batch needs at least one block")
    last = blocks[-1]
    header = BatchHeader(
        block_number=last.height,
        merkle_root=last.merkle_root,
        delayed_count=last.delayed_count,
        timestamp=last.timestamp,
    )
    body = compress(b"".join(serialize_block(b) for b in blocks))
    return Batch(header=header, body=body)


@dataclass
class BatchBuilder:
    """Deterministic batch termination shared by all replicas.

    A batch closes when the next block's ordering key exceeds the first
    one's by more than `window_s`, or when adding the block would push the
    compressed body past `max_bytes`.
    """

    window_s: float = 60.0
    max_bytes: int = 64 * 1024
    blocks: list[SequencerBlock] = field(default_factory=list)
    keys: list[float] = field(default_factory=list)

    def add(self, block: SequencerBlock, key: float) -> Batch | None:
        """Feed the next chain block; returns a closed batch when one ends."""
        closed: Batch | None = None
        if self.blocks:
            if key > self.keys[0] + self.window_s:
                closed = build_batch(self.blocks)
            else:
                tentative = build_batch(self.blocks + [block])
                if len(tentative.body) > self.max_bytes:
                    closed = build_batch(self.blocks)
        if closed is not None:
            self.blocks, self.keys = [block], [key]
            return closed
        self.blocks.append(block)
        self.keys.append(key)
        return None

    def flush(self) -> Batch | None:
        if not self.blocks:
            return None
        closed = build_batch(self.blocks)
        self.blocks, self.keys = [], []
        return closed

    def reset(self) -> None:
        self.blocks, self.keys = [], []
