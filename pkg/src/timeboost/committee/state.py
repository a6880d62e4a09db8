"""The sequencer replica: one deterministic state machine per committee member.

All replicated state lives in `CoreState` and changes only inside
`apply()`, driven by the totally ordered broadcast stream; everything a
replica wants to say is derived afterwards (`pump`), so two replicas that
saw the same messages hold byte-identical state regardless of clocks.
Local duties (issuing timestamps, signing, recovering) sit around that
core and never leak into the digest.
"""

from __future__ import annotations

import copy
import math
import struct
from dataclasses import dataclass, field

from ..score import ScoreParams, time_boost
from .blocks import Batch, BatchBuilder, SequencerBlock, genesis_block
from .crypto import MockThresholdScheme, sha256, sign_digest, verify_signature
from .l1 import L1Stub, delayed_plaintext
from .merkle import MerkleAccumulator
from .messages import (
    BatchSignature,
    BlockSignature,
    DecryptionShare,
    EncTx,
    LocalTimestamp,
    Msg,
    NewEpoch,
    Recover,
    StateHash,
)
from .timestamps import TimestampIssuer, TimestampTriple


def pack_user_tx(fee: float, body: bytes) -> bytes:
    """Canonical user transaction plaintext: 8-byte fee then the body."""
    return struct.pack(">d", fee) + body


def parse_user_tx(plaintext: bytes) -> tuple[float, bytes] | None:
    if len(plaintext) < 8:
        return None
    (fee,) = struct.unpack(">d", plaintext[:8])
    if not (math.isfinite(fee) and fee >= 0):
        return None
    return fee, plaintext[8:]


def submit(plaintext: bytes, declared_fee: float, scheme: MockThresholdScheme) -> EncTx:
    """What a user sends to every sequencer: (Enc(T), declared fee).

    The declared fee may differ from the fee inside the plaintext; such a
    transaction will be discarded after decryption.
    """
    return EncTx(ciphertext=scheme.encrypt(plaintext), fee=declared_fee)


def submit_delayed(index: int, payload: bytes) -> EncTx:
    """Delayed-inbox message: travels in the clear with fee zero.

    The canonical plaintext carries the inbox index, so identical payloads
    at different indices stay distinct transactions.
    """
    return EncTx(ciphertext=delayed_plaintext(index, payload), fee=0.0, delayed_index=index)


def adjusted_timestamp(tau: TimestampTriple, fee: float, params: ScoreParams) -> float:
    """Inclusion key: consensus time minus the fee's time boost, in seconds."""
    return tau.seconds - time_boost(fee, params)


@dataclass
class PendingRecord:
    """Everything the committee knows about one not-yet-final transaction."""

    enc: EncTx
    stamps: dict[int, TimestampTriple] = field(default_factory=dict)
    consensus: TimestampTriple | None = None
    adjusted: float | None = None
    shares: dict[int, bytes] = field(default_factory=dict)
    plaintext: bytes | None = None
    discarded: str | None = None
    blocked: bool = False
    block: SequencerBlock | None = None
    block_tau: float | None = None
    block_sigs: dict[int, bytes] = field(default_factory=dict)
    l1_certified: bool = False

    @property
    def open(self) -> bool:
        return not self.blocked and self.discarded is None


@dataclass
class ClosedBatch:
    batch: Batch
    sigs: dict[int, bytes] = field(default_factory=dict)


@dataclass
class CoreState:
    """The replicated portion of a sequencer's state."""

    epoch: int
    max_ts: dict[int, TimestampTriple]
    pending: dict[bytes, PendingRecord]
    chain: list[SequencerBlock]
    acc: MerkleAccumulator
    batch: BatchBuilder
    closed_batches: list[ClosedBatch]

    @staticmethod
    def fresh(batch_window: float, batch_max_bytes: int) -> "CoreState":
        acc = MerkleAccumulator()
        stub = SequencerBlock(0, 0, b"", 0, b"")
        acc.append(stub.tuple_bytes())
        return CoreState(
            epoch=0,
            max_ts={},
            pending={},
            chain=[genesis_block(acc.root())],
            acc=acc,
            batch=BatchBuilder(window_s=batch_window, max_bytes=batch_max_bytes),
            closed_batches=[],
        )

    @property
    def delayed_count(self) -> int:
        return self.chain[-1].delayed_count


def _enc_triple(t: TimestampTriple) -> bytes:
    return struct.pack(">qHQ", t.t_ms, t.member, t.seq)


def _enc_opt(data: bytes | None) -> bytes:
    if data is None:
        return b"\x00"
    return b"\x01" + struct.pack(">I", len(data)) + data


def encode_state(core: CoreState) -> bytes:
    """Canonical byte encoding of the replicated state (digest material)."""
    parts = [struct.pack(">Q", core.epoch)]
    parts.append(struct.pack(">H", len(core.max_ts)))
    for member in sorted(core.max_ts):
        parts.append(struct.pack(">H", member) + _enc_triple(core.max_ts[member]))
    parts.append(struct.pack(">I", len(core.pending)))
    for h in sorted(core.pending):
        rec = core.pending[h]
        parts.append(struct.pack(">I", len(h)) + h)
        parts.append(struct.pack(">I", len(rec.enc.ciphertext)) + rec.enc.ciphertext)
        parts.append(struct.pack(">d", rec.enc.fee) + struct.pack(">q", rec.enc.delayed_index))
        parts.append(struct.pack(">H", len(rec.stamps)))
        for member in sorted(rec.stamps):
            parts.append(struct.pack(">H", member) + _enc_triple(rec.stamps[member]))
        parts.append(b"\x01" + _enc_triple(rec.consensus) if rec.consensus else b"\x00")
        parts.append(
            b"\x01" + struct.pack(">d", rec.adjusted) if rec.adjusted is not None else b"\x00"
        )
        parts.append(struct.pack(">H", len(rec.shares)))
        for member in sorted(rec.shares):
            share = rec.shares[member]
            parts.append(struct.pack(">HI", member, len(share)) + share)
        parts.append(_enc_opt(rec.plaintext))
        parts.append(_enc_opt(rec.discarded.encode() if rec.discarded else None))
        parts.append(bytes([rec.blocked, rec.l1_certified]))
        if rec.block is not None:
            parts.append(b"\x01" + rec.block.tuple_bytes() + rec.block.merkle_root)
            parts.append(struct.pack(">q", rec.block.delayed_index))
            parts.append(struct.pack(">d", rec.block_tau if rec.block_tau is not None else 0.0))
        else:
            parts.append(b"\x00")
        parts.append(struct.pack(">H", len(rec.block_sigs)))
        for member in sorted(rec.block_sigs):
            sig = rec.block_sigs[member]
            parts.append(struct.pack(">HI", member, len(sig)) + sig)
    parts.append(struct.pack(">Q", len(core.chain)))
    for blk in core.chain:
        parts.append(blk.tuple_bytes() + blk.merkle_root + struct.pack(">q", blk.delayed_index))
    parts.append(struct.pack(">H", len(core.batch.blocks)))
    for blk, key in zip(core.batch.blocks, core.batch.keys):
        parts.append(struct.pack(">Qd", blk.height, key))
    parts.append(struct.pack(">I", len(core.closed_batches)))
    for cb in core.closed_batches:
        parts.append(cb.batch.header.encode())
        parts.append(struct.pack(">I", len(cb.batch.body)) + cb.batch.body)
        parts.append(struct.pack(">H", len(cb.sigs)))
        for member in sorted(cb.sigs):
            sig = cb.sigs[member]
            parts.append(struct.pack(">HI", member, len(sig)) + sig)
    return b"".join(parts)


def state_digest(core: CoreState) -> bytes:
    return sha256(b"state|" + encode_state(core))


class Sequencer:
    """One committee member: replicated core plus the member's local duties."""

    def __init__(
        self,
        member_id: int,
        n: int,
        f: int,
        params: ScoreParams,
        scheme: MockThresholdScheme,
        l1: L1Stub,
        batch_window: float = 60.0,
        batch_max_bytes: int = 64 * 1024,
    ) -> None:
        if n % 2 == 0:
            raise ValueError(f"committee size must be odd, got {n}")
        if not f < n / 3:
            raise ValueError(f"fault bound requires f < n/3, got f={f}, n={n}")
        self.member_id = member_id
        self.n = n
        self.f = f
        self.params = params
        self.scheme = scheme
        self.l1 = l1
        self.core = CoreState.fresh(batch_window, batch_max_bytes)

        self.issuer = TimestampIssuer(member_id)
        self._stamped: set[bytes] = set()
        self._shares_sent: set[bytes] = set()
        self._signed_blocks: set[bytes] = set()
        self._signed_batches: set[bytes] = set()
        self._block_index: dict[bytes, bytes] = {}  # block digest -> tx hash
        self._batch_index: dict[bytes, int] = {}

        # Epoch-change pause bookkeeping (all local).
        self.paused = False
        self.resume_at: float | None = None
        self._pause_buffer: list[Msg] = []
        self._intake_buffer: list[EncTx] = []
        self._pending_restamps: list[EncTx] = []

        # Recovery bookkeeping (all local).
        self._replaying = False
        self.recovering = False
        self._recover_nonce: bytes | None = None
        self._record_started = False
        self._recorded: list[Msg] = []
        self._hash_tally: dict[bytes, set[int]] = {}
        self.fetch_target: bytes | None = None
        self._recover_count = 0
        self.snapshots: dict[tuple[int, bytes], tuple[bytes, CoreState]] = {}

    # -- digests ---------------------------------------------------------------

    def state_digest(self) -> bytes:
        return state_digest(self.core)

    # -- transaction intake ------------------------------------------------------

    def receive_transaction(self, enc: EncTx, clock_s: float) -> list[Msg]:
        """A transaction arrived (from a user, or noticed in the delayed inbox)."""
        if self.paused:
            self._intake_buffer.append(enc)
            return []
        return self._stamp_if_new(enc, clock_s)

    def _stamp_if_new(self, enc: EncTx, clock_s: float) -> list[Msg]:
        h = enc.h
        if h in self._stamped:
            return []
        rec = self.core.pending.get(h)
        if rec is not None and not rec.open:
            return []
        self._stamped.add(h)
        stamp = self.issuer.issue(int(clock_s * 1000))
        return [LocalTimestamp(epoch=self.core.epoch, sender=self.member_id, enc=enc, stamp=stamp)]

    # -- broadcast delivery -------------------------------------------------------

    def deliver(self, msg: Msg, clock_s: float) -> list[Msg]:
        """Handle the next message from the atomic broadcast, in global order."""
        if self.recovering:
            return self._deliver_recovering(msg, clock_s)
        if self.paused:
            self._pause_buffer.append(msg)
            return []
        out = self.apply(msg, clock_s)
        out.extend(self.pump())
        return out

    # -- the deterministic transition -------------------------------------------

    def apply(self, msg: Msg, clock_s: float) -> list[Msg]:
        """Deterministic state transition; invalid messages are ignored, never faults."""
        core = self.core
        out: list[Msg] = []

        if isinstance(msg, LocalTimestamp):
            if msg.epoch != core.epoch:
                return out
            if msg.stamp.member != msg.sender:
                return out
            prev = core.max_ts.get(msg.sender)
            if prev is not None and msg.stamp <= prev:
                return out  # out-of-order local timestamp
            core.max_ts[msg.sender] = msg.stamp
            h = msg.enc.h
            rec = core.pending.get(h)
            if rec is None:
                rec = PendingRecord(enc=msg.enc)
                core.pending[h] = rec
            if rec.open and msg.sender not in rec.stamps:
                rec.stamps[msg.sender] = msg.stamp
            self._recheck_consensus()
            self._drain_ready()
            # First sight of someone else's transaction: stamp it ourselves.
            if rec.open:
                out.extend(self._stamp_if_new(msg.enc, clock_s))

        elif isinstance(msg, DecryptionShare):
            if msg.epoch != core.epoch:
                return out
            rec = core.pending.get(msg.h)
            if rec is None or not rec.open:
                return out
            if not self._willing_to_share(msg.h, rec):
                return out
            if msg.adjusted != rec.adjusted:
                return out
            if not MockThresholdScheme.verify_share(msg.sender, msg.h, msg.share):
                return out
            rec.shares[msg.sender] = msg.share
            self._drain_ready()

        elif isinstance(msg, BlockSignature):
            if msg.epoch != core.epoch:
                return out
            h = self._block_index.get(msg.digest)
            if h is None:
                return out  # not a block we computed ourselves: unwilling
            rec = core.pending.get(h)
            if rec is None or rec.block is None or rec.block.digest != msg.digest:
                return out
            if rec.l1_certified:
                return out
            if not verify_signature(msg.sender, msg.digest, msg.sig):
                return out
            rec.block_sigs[msg.sender] = msg.sig

        elif isinstance(msg, BatchSignature):
            if msg.epoch != core.epoch:
                return out
            idx = self._batch_index.get(msg.digest)
            if idx is None or idx >= len(core.closed_batches):
                return out
            cb = core.closed_batches[idx]
            if cb.batch.digest != msg.digest:
                return out
            if not verify_signature(msg.sender, msg.digest, msg.sig):
                return out
            cb.sigs[msg.sender] = msg.sig

        elif isinstance(msg, NewEpoch):
            if msg.block_number <= core.epoch:
                return out
            block = self.l1.verify_force_include(msg.txid, msg.block_number)
            if block is None:
                return out
            out.extend(
                self._start_epoch(msg.block_number, block, clock_s, pause=not self._replaying)
            )

        elif isinstance(msg, Recover):
            if msg.sender == self.member_id:
                return out
            snapshot = copy.deepcopy(core)
            digest = state_digest(snapshot)
            self.snapshots[(msg.sender, msg.nonce)] = (digest, snapshot)
            out.append(StateHash(sender=self.member_id, recovering=msg.sender,
                                 nonce=msg.nonce, digest=digest))

        elif isinstance(msg, StateHash):
            pass  # only meaningful to the recovering member

        return out

    # -- consensus timestamps -------------------------------------------------------

    def consensus_timestamp(self, h: bytes) -> TimestampTriple | None:
        """The consensus timestamp for h if it is decided, else None."""
        rec = self.core.pending.get(h)
        if rec is None:
            return None
        if rec.consensus is not None:
            return rec.consensus
        return self._consensus_candidate(rec)

    def _consensus_candidate(self, rec: PendingRecord) -> TimestampTriple | None:
        core = self.core
        stamps = rec.stamps
        if not stamps:
            return None
        half = (self.n - 1) // 2
        for tau in sorted(stamps.values()):
            below = sum(1 for s in stamps.values() if s < tau)
            if below != half:
                continue
            non_assigners = [i for i in range(self.n) if i not in stamps]
            arm1 = all(
                core.max_ts.get(i) is not None and core.max_ts[i] > tau for i in non_assigners
            )
            if arm1:
                return tau
            at_least = sum(
                1 for i in range(self.n)
                if core.max_ts.get(i) is not None and core.max_ts[i] >= tau
            )
            if at_least >= self.n - self.f:
                return tau
        return None

    def _recheck_consensus(self) -> None:
        for rec in self.core.pending.values():
            if rec.consensus is not None or not rec.open:
                continue
            tau = self._consensus_candidate(rec)
            if tau is not None:
                rec.consensus = tau
                rec.adjusted = adjusted_timestamp(tau, rec.enc.fee, self.params)

    # -- decryption and block creation ------------------------------------------------

    def _release_ready(self, adjusted: float) -> bool:
        """At least n-f members' max timestamps have passed adjusted + g."""
        bar = adjusted + self.params.g
        count = sum(1 for t in self.core.max_ts.values() if t.seconds >= bar)
        return count >= self.n - self.f

    def _willing_to_share(self, h: bytes, rec: PendingRecord) -> bool:
        return rec.adjusted is not None and self._release_ready(rec.adjusted)

    def _ready_queue(self) -> list[tuple[float, bytes]]:
        return sorted(
            (rec.adjusted, h)
            for h, rec in self.core.pending.items()
            if rec.open and rec.adjusted is not None
        )

    def _drain_ready(self) -> None:
        """Decrypt, validate, and block transactions in adjusted-time order.

        Strict head-of-line: a transaction with a smaller adjusted time
        blocks later ones until its own shares arrive, which is what keeps
        the chain ordered identically everywhere.
        """
        core = self.core
        while True:
            queue = self._ready_queue()
            if not queue:
                return
            adjusted, h = queue[0]
            rec = core.pending[h]
            if rec.enc.is_delayed and rec.enc.delayed_index < core.delayed_count:
                # Already consumed on the canonical chain (force-included).
                rec.blocked = True
                rec.l1_certified = True
                continue
            plaintext = self.scheme.combine(rec.enc.ciphertext, h, rec.shares)
            if plaintext is None:
                return  # head of line still sealed
            rec.plaintext = plaintext
            reason = self._validate(rec, plaintext)
            if reason is not None:
                rec.discarded = reason
                continue
            self._create_block(rec, adjusted)

    def _validate(self, rec: PendingRecord, plaintext: bytes) -> str | None:
        if rec.enc.is_delayed:
            return None if rec.enc.fee == 0.0 else "delayed message with nonzero fee"
        parsed = parse_user_tx(plaintext)
        if parsed is None:
            return "malformed transaction"
        fee, _ = parsed
        if fee != rec.enc.fee:
            return f"fee mismatch: declared {rec.enc.fee}, embedded {fee}"
        return None

    def _create_block(self, rec: PendingRecord, adjusted: float) -> None:
        core = self.core
        height = len(core.chain)
        if rec.enc.is_delayed:
            if rec.enc.delayed_index != core.delayed_count:
                raise AssertionError(
                    f"delayed message {rec.enc.delayed_index} consumed out of order "
                    f"(expected {core.delayed_count})"
                )
            delayed_count = core.delayed_count + 1
            delayed_index = rec.enc.delayed_index
        else:
            delayed_count = core.delayed_count
            delayed_index = -1
        timestamp = int(math.floor(adjusted + self.params.g))
        assert rec.plaintext is not None
        core.acc.append(
            SequencerBlock(height, delayed_count, rec.plaintext, timestamp, b"",
                           delayed_index).tuple_bytes()
        )
        block = SequencerBlock(
            height=height,
            delayed_count=delayed_count,
            payload=rec.plaintext,
            timestamp=timestamp,
            merkle_root=core.acc.root(),
            delayed_index=delayed_index,
        )
        core.chain.append(block)
        rec.blocked = True
        rec.block = block
        rec.block_tau = adjusted
        self._block_index[block.digest] = rec.enc.h
        closed = core.batch.add(block, adjusted)
        if closed is not None:
            self._register_closed_batch(closed)

    def _register_closed_batch(self, batch: Batch) -> None:
        self._batch_index[batch.digest] = len(self.core.closed_batches)
        self.core.closed_batches.append(ClosedBatch(batch=batch))

    # -- emissions ----------------------------------------------------------------

    def pump(self) -> list[Msg]:
        """Everything this member owes the channel given its current state."""
        core = self.core
        out: list[Msg] = []
        shareable = sorted(
            (rec.adjusted, h)
            for h, rec in core.pending.items()
            if rec.open
            and rec.adjusted is not None
            and h not in self._shares_sent
            and self._release_ready(rec.adjusted)
        )
        for adjusted, h in shareable:
            self._shares_sent.add(h)
            out.append(
                DecryptionShare(
                    epoch=core.epoch,
                    sender=self.member_id,
                    h=h,
                    share=MockThresholdScheme.share(self.member_id, h),
                    adjusted=adjusted,
                )
            )
        for h, rec in core.pending.items():
            if rec.block is None or rec.l1_certified:
                continue
            digest = rec.block.digest
            if digest in self._signed_blocks:
                continue
            self._signed_blocks.add(digest)
            out.append(
                BlockSignature(
                    epoch=core.epoch,
                    sender=self.member_id,
                    digest=digest,
                    sig=sign_digest(self.member_id, digest),
                )
            )
        for cb in core.closed_batches:
            digest = cb.batch.digest
            if digest in self._signed_batches:
                continue
            self._signed_batches.add(digest)
            out.append(
                BatchSignature(
                    epoch=core.epoch,
                    sender=self.member_id,
                    digest=digest,
                    sig=sign_digest(self.member_id, digest),
                )
            )
        return out

    def postable_batches(self) -> list[ClosedBatch]:
        """Closed batches carrying a full quorum of signatures."""
        return [cb for cb in self.core.closed_batches if len(cb.sigs) >= self.f + 1]

    # -- epochs ------------------------------------------------------------------

    def _start_epoch(self, b: int, forced: SequencerBlock, clock_s: float,
                     pause: bool = True) -> list[Msg]:
        """The reorg procedure: rebuild the chain past the forced block and
        queue re-timestamping of in-flight transactions."""
        core = self.core

        orphaned_blocks = [
            blk for blk in core.chain[b:]
            if blk.digest in self._signed_blocks and blk.delayed_index != forced.delayed_index
        ]
        restamps = [
            rec.enc
            for h, rec in core.pending.items()
            if rec.open
            and self.member_id in rec.stamps
            and rec.enc.delayed_index != forced.delayed_index
        ]
        restamps.sort(key=lambda enc: core.pending[enc.h].stamps[self.member_id])

        # Forget observed local timestamps, keep the per-member maximums.
        for rec in core.pending.values():
            rec.stamps.clear()

        core.epoch = b

        # Rewind to the L1-final prefix and adopt the forced block.
        dropped = core.chain[b:]
        for blk in dropped:
            self._block_index.pop(blk.digest, None)
        core.chain = core.chain[:b]
        core.acc.truncate(b)
        core.acc.append(forced.tuple_bytes())
        if core.acc.root() != forced.merkle_root:
            raise AssertionError("forced block root does not match local chain prefix")
        core.chain.append(forced)

        forced_rec = core.pending.get(
            EncTx(forced.payload, 0.0, forced.delayed_index).h
        )
        if forced_rec is not None:
            forced_rec.blocked = True
            forced_rec.block = forced
            forced_rec.block_tau = float(forced.timestamp)
            forced_rec.l1_certified = True
            forced_rec.block_sigs = {}

        # Unposted batches covered orphaned heights; rebuild them.
        keep, drop = [], []
        for cb in core.closed_batches:
            (keep if cb.batch.header.block_number < b else drop).append(cb)
        core.closed_batches = keep
        self._batch_index = {cb.batch.digest: i for i, cb in enumerate(keep)}
        core.batch.reset()

        # Re-create every orphaned block in order with the forced timestamp.
        for old in orphaned_blocks:
            rec_h = None
            for h, rec in core.pending.items():
                if rec.block is not None and rec.block.digest == old.digest:
                    rec_h = h
                    break
            if rec_h is None:
                raise AssertionError("orphaned block has no pending record")
            height = len(core.chain)
            if old.delayed_index >= 0:
                if old.delayed_index != core.delayed_count:
                    raise AssertionError("orphaned delayed block out of order")
                delayed_count = core.delayed_count + 1
            else:
                delayed_count = core.delayed_count
            core.acc.append(
                SequencerBlock(height, delayed_count, old.payload, forced.timestamp, b"",
                               old.delayed_index).tuple_bytes()
            )
            new_block = SequencerBlock(
                height=height,
                delayed_count=delayed_count,
                payload=old.payload,
                timestamp=forced.timestamp,
                merkle_root=core.acc.root(),
                delayed_index=old.delayed_index,
            )
            core.chain.append(new_block)
            self._block_index[new_block.digest] = rec_h
            rec = core.pending[rec_h]
            rec.block = new_block
            rec.block_tau = float(forced.timestamp)
            rec.block_sigs = {}
            closed = core.batch.add(new_block, float(forced.timestamp))
            if closed is not None:
                self._register_closed_batch(closed)

        # Shares sent under the old epoch are ignored by peers that had
        # already switched; re-offer them under the new epoch.
        for h, rec in core.pending.items():
            if rec.open:
                self._shares_sent.discard(h)

        self._pending_restamps = restamps
        if pause:
            self.paused = True
            self.resume_at = float(forced.timestamp)
        return self.pump()

    def resume_epoch(self, clock_s: float) -> list[Msg]:
        """Finish the epoch change once local time passed the forced timestamp:
        re-timestamp orphans, then drain everything buffered while paused."""
        if not self.paused:
            return []
        if clock_s <= (self.resume_at or 0.0):
            raise AssertionError("resume_epoch called before the forced timestamp passed")
        self.paused = False
        self.resume_at = None
        out: list[Msg] = []
        for enc in self._pending_restamps:
            rec = self.core.pending.get(enc.h)
            if rec is not None and not rec.open:
                continue
            stamp = self.issuer.issue(int(clock_s * 1000))
            out.append(LocalTimestamp(epoch=self.core.epoch, sender=self.member_id,
                                      enc=enc, stamp=stamp))
        self._pending_restamps = []
        buffered, self._pause_buffer = self._pause_buffer, []
        for msg in buffered:
            out.extend(self.apply(msg, clock_s))
            out.extend(self.pump())
        intake, self._intake_buffer = self._intake_buffer, []
        for enc in intake:
            out.extend(self.receive_transaction(enc, clock_s))
        return out

    # -- recovery -----------------------------------------------------------------

    def start_recovery(self) -> list[Msg]:
        """Begin the cold-start/crash synchronization procedure."""
        self.recovering = True
        self._record_started = False
        self._recorded = []
        self._hash_tally = {}
        self.fetch_target = None
        self._recover_count += 1
        self._recover_nonce = sha256(
            b"nonce|" + struct.pack(">HQ", self.member_id, self._recover_count)
        )
        return [Recover(sender=self.member_id, nonce=self._recover_nonce)]

    def _deliver_recovering(self, msg: Msg, clock_s: float) -> list[Msg]:
        out: list[Msg] = []
        if isinstance(msg, Recover) and msg.sender == self.member_id \
                and msg.nonce == self._recover_nonce:
            self._record_started = True
            return out
        if self._record_started:
            self._recorded.append(msg)
        if isinstance(msg, StateHash) and msg.recovering == self.member_id \
                and msg.nonce == self._recover_nonce:
            members = self._hash_tally.setdefault(msg.digest, set())
            members.add(msg.sender)
            if len(members) >= self.f + 1 and self.fetch_target is None:
                self.fetch_target = msg.digest
        # Still a timestamping citizen: stamp transactions we newly see.
        if isinstance(msg, LocalTimestamp) and msg.enc.h not in self._stamped:
            self._stamped.add(msg.enc.h)
            stamp = self.issuer.issue(int(clock_s * 1000))
            out.append(LocalTimestamp(epoch=msg.epoch, sender=self.member_id,
                                      enc=msg.enc, stamp=stamp))
        return out

    def install_state(self, blob: CoreState, clock_s: float) -> list[Msg]:
        """Adopt a fetched state, replay recorded messages, resume normal duty.

        The blob must hash to the f+1-confirmed digest; a mismatched copy is
        rejected so the caller can fetch from someone else.
        """
        if self.fetch_target is None:
            raise AssertionError("no confirmed state digest yet")
        if state_digest(blob) != self.fetch_target:
            raise ValueError("fetched state does not match the confirmed digest")
        self.core = copy.deepcopy(blob)
        self._rebuild_local_views()
        recorded, self._recorded = self._recorded, []
        self._replaying = True
        try:
            for msg in recorded:
                self.apply(msg, clock_s)  # replay: no emissions beyond timestamps
        finally:
            self._replaying = False
        self.recovering = False
        self._record_started = False
        self._hash_tally = {}
        self.fetch_target = None
        out = self.pump()
        if self._pending_restamps:
            for enc in self._pending_restamps:
                rec = self.core.pending.get(enc.h)
                if rec is not None and not rec.open:
                    continue
                stamp = self.issuer.issue(int(clock_s * 1000))
                out.append(LocalTimestamp(epoch=self.core.epoch, sender=self.member_id,
                                          enc=enc, stamp=stamp))
            self._pending_restamps = []
        self.paused = False
        self.resume_at = None
        return out

    def _rebuild_local_views(self) -> None:
        core = self.core
        me = self.member_id
        self.issuer.resume_from(core.max_ts.get(me))
        self._block_index = {}
        self._signed_blocks = set()
        for h, rec in core.pending.items():
            if rec.block is not None:
                self._block_index[rec.block.digest] = h
                if me in rec.block_sigs:
                    self._signed_blocks.add(rec.block.digest)
            if me in rec.stamps:
                self._stamped.add(h)
            if me in rec.shares:
                self._shares_sent.add(h)
        self._batch_index = {cb.batch.digest: i for i, cb in enumerate(core.closed_batches)}
        self._signed_batches = {
            cb.batch.digest for cb in core.closed_batches if me in cb.sigs
        }
