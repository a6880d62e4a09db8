"""Base-chain stub: delayed inbox, batch acceptance, force-includes.

Maintains its own mirror of the sequencer chain (rebuilt from posted batch
bodies) so a force-include can mint a correctly rooted block without any
committee signatures.  All timing comes from the caller; nothing here
consults a wall clock.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

from .blocks import (
    Batch,
    DELAYED_KIND,
    SequencerBlock,
    decompress,
    genesis_block,
    parse_block_stream,
)
from .crypto import sha256, verify_signature
from .merkle import MerkleAccumulator


class ForceIncludeError(ValueError):
    """The requested force-include is not allowed (too young, consumed, unknown)."""


@dataclass
class DelayedMsg:
    payload: bytes
    enqueued_at: float
    finalized_at: float | None = None

    @property
    def wire_payload(self) -> bytes:
        # Index header is added by the inbox so identical payloads stay distinct.
        return self.payload


def delayed_plaintext(index: int, payload: bytes) -> bytes:
    """Canonical plaintext of delayed message `index` as sequencers carry it."""
    return struct.pack(">Q", index) + payload


@dataclass
class PostResult:
    accepted: bool
    reason: str = ""


class L1Stub:
    """enqueue_delayed / finalize / post_batch / force_include, deterministic."""

    def __init__(self, force_threshold_s: float = 60.0) -> None:
        self.force_threshold_s = force_threshold_s
        self.delayed: list[DelayedMsg] = []
        self.acc = MerkleAccumulator()
        first = SequencerBlock(height=0, delayed_count=0, payload=b"", timestamp=0,
                               merkle_root=b"")
        self.acc.append(first.tuple_bytes())
        self.chain: list[SequencerBlock] = [genesis_block(self.acc.root())]
        self.posted_headers: list[bytes] = []
        self.force_registry: dict[bytes, SequencerBlock] = {}
        self._force_counter = 0

    # -- delayed inbox -------------------------------------------------------

    def enqueue_delayed(self, payload: bytes, now: float) -> int:
        self.delayed.append(DelayedMsg(payload=payload, enqueued_at=now))
        return len(self.delayed) - 1

    def finalize(self, now: float) -> list[tuple[int, bytes]]:
        """Mark every enqueued message final; returns the newly final ones."""
        fresh: list[tuple[int, bytes]] = []
        for idx, msg in enumerate(self.delayed):
            if msg.finalized_at is None:
                msg.finalized_at = now
                fresh.append((idx, msg.payload))
        return fresh

    # -- posted batches --------------------------------------------------------

    @property
    def last_block(self) -> SequencerBlock:
        return self.chain[-1]

    def post_batch(self, batch: Batch, signatures: dict[int, bytes], f: int) -> PostResult:
        """Accept iff quorum-signed, monotone, and consistent with the mirror."""
        valid = sum(
            1 for member, sig in signatures.items()
            if verify_signature(member, batch.digest, sig)
        )
        if valid < f + 1:
            return PostResult(False, f"need {f + 1} valid signatures, got {valid}")
        last = self.last_block
        if batch.header.block_number <= last.height:
            return PostResult(False, "stale block number")
        if batch.header.delayed_count < last.delayed_count:
            return PostResult(False, "delayed message count went backwards")
        try:
            wire = parse_block_stream(decompress(batch.body))
        except ValueError as exc:
            return PostResult(False, f"malformed body: {exc}")
        if not wire:
            return PostResult(False, "empty batch body")

        # Replay the body onto a scratch copy of the mirror; adopt on success.
        new_blocks: list[SequencerBlock] = []
        height = last.height
        delayed_count = last.delayed_count
        for wb in wire:
            height += 1
            if wb.kind == DELAYED_KIND:
                if wb.delayed_index != delayed_count:
                    return PostResult(False, "delayed index out of order")
                if wb.delayed_index >= len(self.delayed):
                    return PostResult(False, "unknown delayed message")
                payload = delayed_plaintext(wb.delayed_index, self.delayed[wb.delayed_index].payload)
                delayed_count += 1
                didx = wb.delayed_index
            else:
                payload = wb.payload
                didx = -1
            self.acc.append(
                SequencerBlock(height, delayed_count, payload, wb.timestamp, b"", didx).tuple_bytes()
            )
            new_blocks.append(
                SequencerBlock(height, delayed_count, payload, wb.timestamp, self.acc.root(), didx)
            )
        if new_blocks[-1].height != batch.header.block_number or \
                new_blocks[-1].delayed_count != batch.header.delayed_count or \
                new_blocks[-1].timestamp != batch.header.timestamp or \
                new_blocks[-1].merkle_root != batch.header.merkle_root:
            self.acc.truncate(len(self.chain))
            return PostResult(False, "header does not match replayed body")
        self.chain.extend(new_blocks)
        self.posted_headers.append(batch.header.encode())
        return PostResult(True)

    # -- force include -----------------------------------------------------------

    def oldest_unconsumed(self) -> int | None:
        idx = self.last_block.delayed_count
        return idx if idx < len(self.delayed) else None

    def force_include(self, index: int, now: float) -> tuple[bytes, SequencerBlock]:
        """Create an L1-certified block consuming delayed message `index`.

        Only the oldest unconsumed message can be forced, and only once it
        is final and older than the threshold.  Returns (txid, block).
        """
        if index < 0 or index >= len(self.delayed):
            raise ForceIncludeError(f"no delayed message {index}")
        if index != self.last_block.delayed_count:
            raise ForceIncludeError(
                f"message {index} is not the oldest unconsumed ({self.last_block.delayed_count})"
            )
        msg = self.delayed[index]
        if msg.finalized_at is None:
            raise ForceIncludeError(f"message {index} is not final yet")
        age = now - msg.enqueued_at
        if age <= self.force_threshold_s:
            raise ForceIncludeError(
                f"message {index} is {age:.3f}s old, threshold {self.force_threshold_s}s"
            )
        height = self.last_block.height + 1
        timestamp = int(math.floor(now))
        payload = delayed_plaintext(index, msg.payload)
        self.acc.append(
            SequencerBlock(height, index + 1, payload, timestamp, b"", index).tuple_bytes()
        )
        block = SequencerBlock(
            height=height,
            delayed_count=index + 1,
            payload=payload,
            timestamp=timestamp,
            merkle_root=self.acc.root(),
            delayed_index=index,
        )
        self.chain.append(block)
        self._force_counter += 1
        txid = sha256(b"force|" + struct.pack(">QQ", self._force_counter, index))
        self.force_registry[txid] = block
        return txid, block

    def verify_force_include(self, txid: bytes, block_number: int) -> SequencerBlock | None:
        block = self.force_registry.get(txid)
        if block is None or block.height != block_number:
            return None
        return block
