"""Run metrics: honest-state convergence, ordering audits, liveness.

`compare_to_centralized` re-orders the included transactions with the
library's scoring policy, using consensus timestamps as arrival times and
priority fees as bids; an honest committee must match it exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from ..score import ScoreParams, Transaction, order
from ..committee.messages import LocalTimestamp
from ..committee.state import Sequencer
from .harness import Simulation


@dataclass
class Metrics:
    name: str
    ok: bool
    violations: list[str]
    digests: dict[int, str]
    digest_match: bool
    included: int
    discarded: int
    pending: int
    submitted: int
    ordering_divergences: int
    fairness_violations: int
    monotonic_stamps: bool
    liveness: bool
    dropped: int
    delays: dict[str, float]
    epochs: dict[int, int]
    batches_posted: int
    details: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> str:
        payload = dict(self.__dict__)
        payload["digests"] = {str(k): v for k, v in self.digests.items()}
        payload["epochs"] = {str(k): v for k, v in self.epochs.items()}
        return json.dumps(payload, indent=2, sort_keys=True)


def _honest_members(sim: Simulation) -> list[int]:
    out = []
    for i in range(sim.config.n):
        if sim.config.behavior(i) != "honest":
            continue
        if sim.drivers[i].crashed:
            continue
        if sim.drivers[i].seq.recovering:
            continue  # never finished catching up; not comparable
        out.append(i)
    return out


def inclusion_order(seq: Sequencer) -> list[tuple[bytes, Any]]:
    """Committee-created (tx hash, record) pairs in chain order."""
    by_digest = {rec.block.digest: (h, rec)
                 for h, rec in seq.core.pending.items()
                 if rec.block is not None}
    out = []
    for block in seq.core.chain[1:]:
        entry = by_digest.get(block.digest)
        if entry is not None and not entry[1].l1_certified:
            out.append(entry)
    return out


def compare_to_centralized(seq: Sequencer, params: ScoreParams) -> tuple[int, int]:
    """(pairwise divergences, fairness violations) of the chain vs the oracle.

    The oracle transaction ids are the hex tx hashes, so its (arrival, id)
    tie-break coincides with the committee's hash tie-break.
    """
    included = inclusion_order(seq)
    txs = []
    for h, rec in included:
        assert rec.consensus is not None
        txs.append(Transaction.at_seconds(h.hex(), rec.consensus.seconds, rec.enc.fee))
    oracle = order(txs, params)
    oracle_pos = {tx.id: i for i, tx in enumerate(oracle)}
    divergences = 0
    for i, (h, _) in enumerate(included):
        if oracle_pos[h.hex()] != i:
            divergences += 1

    fairness = 0
    for i, (h_a, rec_a) in enumerate(included):
        for h_b, rec_b in included[i + 1:]:
            # rec_b is sequenced after rec_a; that is unfair only if rec_b's
            # consensus time precedes rec_a's by at least g.
            if rec_b.consensus.seconds + params.g <= rec_a.consensus.seconds:
                fairness += 1
    return divergences, fairness


def stamps_monotonic(sim: Simulation) -> bool:
    last: dict[int, Any] = {}
    for sender, msg in sim.channel.decoded_log():
        if not isinstance(msg, LocalTimestamp):
            continue
        if msg.sender != sender:
            return False
        prev = last.get(sender)
        if prev is not None and msg.stamp <= prev:
            return False
        last[sender] = msg.stamp
    return True


def collect_metrics(sim: Simulation) -> Metrics:
    cfg = sim.config
    violations: list[str] = []
    honest = _honest_members(sim)

    digests = {i: sim.drivers[i].seq.state_digest().hex() for i in honest}
    digest_match = len(set(digests.values())) <= 1
    if not digest_match:
        violations.append("honest state digests diverge")

    observer = sim.drivers[honest[0]].seq if honest else sim.drivers[0].seq

    included = discarded = pending = 0
    submitted = 0
    dropped = 0
    delays: list[float] = []
    block_times = {e["tx"]: e["time"] for e in sim.events if e["ev"] == "block"}
    for h, info in sim.tx_registry.items():
        if info["internal"]:
            continue
        submitted += 1
        rec = observer.core.pending.get(h)
        if rec is None:
            # A delayed message can reach the chain through a force-include
            # without any sequencer ever opening a record for it.
            if info["delayed"] and info["delayed_index"] < observer.core.delayed_count:
                included += 1
            else:
                dropped += 1
            continue
        if rec.blocked:
            included += 1
            t_block = block_times.get(h.hex())
            if t_block is not None and not rec.l1_certified:
                delays.append(t_block - info["submit_time"])
        elif rec.discarded is not None:
            discarded += 1
        else:
            pending += 1
    liveness = pending == 0 and dropped == 0
    if not liveness:
        violations.append(f"liveness: {pending} pending, {dropped} unseen at shutdown")

    divergences, fairness = compare_to_centralized(observer, sim.params)
    if cfg.check_ordering and divergences:
        violations.append(f"ordering diverges from the centralized policy ({divergences})")
    if fairness:
        violations.append(f"fairness violations: {fairness}")

    monotonic = stamps_monotonic(sim)
    if not monotonic:
        violations.append("per-member timestamps not strictly increasing")

    delay_summary = {}
    if delays:
        delay_summary = {
            "min": min(delays),
            "max": max(delays),
            "mean": sum(delays) / len(delays),
        }

    batches_posted = sum(1 for e in sim.events if e["ev"] == "batch_post" and e["accepted"])

    return Metrics(
        name=cfg.name,
        ok=not violations,
        violations=violations,
        digests=digests,
        digest_match=digest_match,
        included=included,
        discarded=discarded,
        pending=pending,
        submitted=submitted,
        ordering_divergences=divergences,
        fairness_violations=fairness,
        monotonic_stamps=monotonic,
        liveness=liveness,
        dropped=dropped,
        delays=delay_summary,
        epochs={i: sim.drivers[i].seq.core.epoch for i in range(cfg.n)},
        batches_posted=batches_posted,
    )
