"""Seeded discrete-event simulation of the sequencer committee.

One global event heap drives everything: user submissions fan out to the
replicas through a per-(user, member) latency matrix, broadcasts commit in
a single total order and are delivered to each replica with its own delay
offset (order preserved), and the L1 stub advances on scripted events.
Runs are bit-reproducible for a fixed config.
"""

from __future__ import annotations

import heapq
import json
import random
from dataclasses import dataclass, field
from typing import Any, Callable

from ..score import ScoreParams
from ..committee.crypto import MockThresholdScheme
from ..committee.l1 import L1Stub
from ..committee.messages import (
    BatchSignature,
    BlockSignature,
    LocalTimestamp,
    Msg,
    NewEpoch,
    decode_message,
    encode_message,
)
from ..committee.state import Sequencer, pack_user_tx, submit, submit_delayed
from .config import SimConfig


@dataclass(order=True)
class _Event:
    time: float
    seq: int
    kind: str = field(compare=False)
    data: dict = field(compare=False, default_factory=dict)


class BroadcastChannel:
    """Atomic broadcast: one global order, per-replica delivery offsets."""

    def __init__(self, n: int, rng: random.Random, delay_min: float, delay_max: float,
                 schedule: Callable[[float, str, dict], None]) -> None:
        self.n = n
        self.rng = rng
        self.delay_min = delay_min
        self.delay_max = delay_max
        self.schedule = schedule
        self.log: list[tuple[int, bytes]] = []  # (sender, encoded message)
        self._last_delivery = [0.0] * n

    def broadcast(self, sender: int, msg: Msg, now: float) -> None:
        encoded = encode_message(msg)
        index = len(self.log)
        self.log.append((sender, encoded))
        for member in range(self.n):
            delay = self.rng.uniform(self.delay_min, self.delay_max)
            at = max(self._last_delivery[member], now + delay)
            self._last_delivery[member] = at
            self.schedule(at, "deliver", {"member": member, "index": index})

    def decoded_log(self) -> list[tuple[int, Msg]]:
        return [(sender, decode_message(raw)) for sender, raw in self.log]


class ReplicaDriver:
    """Wraps one Sequencer with behavior, clock skew, and crash state."""

    def __init__(self, sim: "Simulation", member: int, behavior: str, skew: float) -> None:
        self.sim = sim
        self.member = member
        self.behavior = behavior
        self.skew = skew
        cfg = sim.config
        self.seq = Sequencer(
            member_id=member,
            n=cfg.n,
            f=cfg.f,
            params=sim.params,
            scheme=sim.scheme,
            l1=sim.l1,
            batch_window=cfg.batch_window,
            batch_max_bytes=cfg.batch_max_bytes,
        )
        self.crashed = behavior == "crashed"
        self.resume_scheduled = False
        self.fetch_scheduled = False

    def clock(self, now: float) -> float:
        local = now + self.skew
        if self.behavior == "low_stamper":
            local = min(local, self.sim.config.low_stamp_floor_ms / 1000.0)
        return local

    def _filter(self, msgs: list[Msg]) -> list[Msg]:
        if self.behavior == "silent":
            return []
        if self.behavior == "non_signer":
            return [m for m in msgs if not isinstance(m, (BlockSignature, BatchSignature))]
        return msgs

    def send(self, msgs: list[Msg], now: float) -> None:
        if self.crashed:
            return
        for msg in self._filter(msgs):
            self.sim.channel.broadcast(self.member, msg, now)

    def on_receive_tx(self, enc, now: float) -> None:
        if self.crashed:
            return
        self.send(self.seq.receive_transaction(enc, self.clock(now)), now)

    def on_deliver(self, msg: Msg, now: float) -> None:
        if self.crashed:
            return
        out = self.seq.deliver(msg, self.clock(now))
        self.send(out, now)
        self._post_delivery(now)

    def _post_delivery(self, now: float) -> None:
        seq = self.seq
        if seq.paused and not self.resume_scheduled:
            self.resume_scheduled = True
            resume_sim_time = max(now, (seq.resume_at or 0.0) - self.skew) + 0.001
            self.sim.schedule(resume_sim_time, "epoch_resume", {"member": self.member})
        if seq.recovering and seq.fetch_target is not None and not self.fetch_scheduled:
            self.fetch_scheduled = True
            self.sim.schedule(now + self.sim.config.fetch_delay, "state_fetch",
                              {"member": self.member})


class Simulation:
    """Runs one scenario; see `run_scenario` for the one-call entry point."""

    def __init__(self, config: SimConfig) -> None:
        self.config = config
        self.params = ScoreParams(g=config.g, c=config.c)
        self.scheme = MockThresholdScheme(threshold=config.f + 1)
        self.l1 = L1Stub(force_threshold_s=config.force_threshold)
        self.rng = random.Random(config.seed)
        self.now = 0.0
        self._heap: list[_Event] = []
        self._counter = 0
        self.events: list[dict[str, Any]] = []  # structured event log
        self.tx_registry: dict[bytes, dict[str, Any]] = {}
        self.posted_digests: set[bytes] = set()

        self.channel = BroadcastChannel(
            config.n, self.rng, config.broadcast_min, config.broadcast_max, self.schedule
        )
        skews = [self.rng.uniform(-config.clock_skew, config.clock_skew) for _ in range(config.n)]
        self.drivers = [
            ReplicaDriver(self, i, config.behavior(i), skews[i]) for i in range(config.n)
        ]
        # Fixed per-(user, member) submission latency.
        self._latency: dict[tuple[int, int], float] = {}

        self._schedule_script()

    # -- scheduling ------------------------------------------------------------

    def schedule(self, time: float, kind: str, data: dict) -> None:
        self._counter += 1
        heapq.heappush(self._heap, _Event(time, self._counter, kind, data))

    def _latency_for(self, user: int, member: int) -> float:
        key = (user, member)
        if key not in self._latency:
            self._latency[key] = self.rng.uniform(self.config.latency_min, self.config.latency_max)
        return self._latency[key]

    def _schedule_script(self) -> None:
        cfg = self.config
        for tx in cfg.txs:
            self.schedule(tx.time, "submit", {"tx": tx})
        # Heartbeats keep per-member maximum timestamps advancing so the
        # release condition (m_i past adjusted time + g) can fire for the
        # final transactions of the run.
        t = cfg.heartbeat_interval
        i = 0
        while t < cfg.duration:
            self.schedule(t, "heartbeat", {"index": i})
            t += cfg.heartbeat_interval
            i += 1
        for j, d in enumerate(cfg.delayed):
            self.schedule(d.time, "delayed_enqueue", {"index": j})
        if cfg.force_include_time is not None:
            self.schedule(cfg.force_include_time, "force_include",
                          {"index": cfg.force_include_index})
        for member, time in cfg.crashes:
            self.schedule(time, "crash", {"member": member})
        for member, time in cfg.restarts:
            self.schedule(time, "restart", {"member": member})

    # -- event handlers ------------------------------------------------------------

    def _submit_user_tx(self, fee: float, payload: bytes, user: int,
                        declared: float | None, internal: bool) -> None:
        plaintext = pack_user_tx(fee, payload)
        enc = submit(plaintext, fee if declared is None else declared, self.scheme)
        self.tx_registry[enc.h] = {
            "h": enc.h.hex(),
            "submit_time": self.now,
            "user": user,
            "fee": enc.fee,
            "embedded_fee": fee,
            "internal": internal,
            "delayed": False,
        }
        self.events.append({"ev": "submit", "tx": enc.h.hex(), "time": self.now,
                            "fee": enc.fee, "internal": internal})
        for member in range(self.config.n):
            at = self.now + self._latency_for(user, member)
            self.schedule(at, "tx_arrival", {"member": member, "enc": enc})

    def _handle(self, ev: _Event) -> None:
        cfg = self.config
        kind, data = ev.kind, ev.data

        if kind == "submit":
            tx = data["tx"]
            self._submit_user_tx(tx.fee, tx.payload, tx.user, tx.declared_fee, tx.internal)

        elif kind == "heartbeat":
            payload = b"hb-%d" % data["index"]
            self._submit_user_tx(0.0, payload, user=10_000, declared=None, internal=True)

        elif kind == "tx_arrival":
            self.drivers[data["member"]].on_receive_tx(data["enc"], self.now)

        elif kind == "deliver":
            sender, raw = self.channel.log[data["index"]]
            self.drivers[data["member"]].on_deliver(decode_message(raw), self.now)
            self._maybe_post_batches(data["member"])

        elif kind == "delayed_enqueue":
            d = cfg.delayed[data["index"]]
            idx = self.l1.enqueue_delayed(d.payload, self.now)
            self.events.append({"ev": "delayed_enqueue", "index": idx, "time": self.now})
            self.schedule(self.now + cfg.finalize_delay, "delayed_finalize", {})

        elif kind == "delayed_finalize":
            for idx, payload in self.l1.finalize(self.now):
                enc = submit_delayed(idx, payload)
                self.tx_registry[enc.h] = {
                    "h": enc.h.hex(),
                    "submit_time": self.now,
                    "user": -1,
                    "fee": 0.0,
                    "embedded_fee": 0.0,
                    "internal": False,
                    "delayed": True,
                    "delayed_index": idx,
                }
                self.events.append({"ev": "delayed_final", "index": idx, "tx": enc.h.hex(),
                                    "time": self.now})
                if not cfg.delayed_blind:
                    for member in range(cfg.n):
                        self.schedule(self.now + cfg.notice_delay, "tx_arrival",
                                      {"member": member, "enc": enc})

        elif kind == "force_include":
            txid, block = self.l1.force_include(data["index"], self.now)
            self.events.append({"ev": "force_include", "index": data["index"],
                                "block": block.height, "time": self.now})
            for member in range(cfg.n):
                self.schedule(self.now + cfg.notice_delay, "force_notice",
                              {"member": member, "txid": txid, "block_number": block.height})

        elif kind == "force_notice":
            driver = self.drivers[data["member"]]
            if driver.crashed or driver.seq.recovering:
                return
            if driver.seq.core.epoch < data["block_number"]:
                driver.send(
                    [NewEpoch(sender=driver.member, block_number=data["block_number"],
                              txid=data["txid"])],
                    self.now,
                )

        elif kind == "crash":
            self.drivers[data["member"]].crashed = True
            self.events.append({"ev": "crash", "member": data["member"], "time": self.now})

        elif kind == "restart":
            driver = self.drivers[data["member"]]
            driver.crashed = False
            driver.fetch_scheduled = False
            self.events.append({"ev": "restart", "member": data["member"], "time": self.now})
            driver.send(driver.seq.start_recovery(), self.now)

        elif kind == "epoch_resume":
            driver = self.drivers[data["member"]]
            driver.resume_scheduled = False
            if driver.crashed or not driver.seq.paused:
                return
            if driver.clock(self.now) <= (driver.seq.resume_at or 0.0):
                driver.resume_scheduled = True
                self.schedule(self.now + 0.05, "epoch_resume", {"member": driver.member})
                return
            out = driver.seq.resume_epoch(driver.clock(self.now))
            self.events.append({"ev": "epoch_resumed", "member": driver.member,
                                "epoch": driver.seq.core.epoch, "time": self.now})
            driver.send(out, self.now)
            driver._post_delivery(self.now)

        elif kind == "state_fetch":
            self._finish_recovery(self.drivers[data["member"]])

    def _finish_recovery(self, driver: ReplicaDriver) -> None:
        driver.fetch_scheduled = False
        seq = driver.seq
        if driver.crashed or not seq.recovering or seq.fetch_target is None:
            return
        key_nonce = seq._recover_nonce
        installed = False
        for peer in self.drivers:
            if peer.member == driver.member:
                continue
            snap = peer.seq.snapshots.get((driver.member, key_nonce))
            if snap is None:
                continue
            digest, blob = snap
            if digest != seq.fetch_target:
                continue  # stale or diverged peer; keep looking
            try:
                out = seq.install_state(blob, driver.clock(self.now))
            except ValueError:
                continue
            driver.send(out, self.now)
            installed = True
            self.events.append({"ev": "recovered", "member": driver.member, "time": self.now,
                                "digest": digest.hex()})
            break
        if not installed:
            # No matching copy yet; retry after another fetch delay.
            driver.fetch_scheduled = True
            self.schedule(self.now + self.config.fetch_delay, "state_fetch",
                          {"member": driver.member})

    def _maybe_post_batches(self, member: int) -> None:
        # Any party may post; the sim lets every live replica try as soon as
        # it sees a quorum.  The L1 contract rejects duplicates/stale posts.
        driver = self.drivers[member]
        if driver.crashed or driver.behavior != "honest":
            return
        for cb in driver.seq.postable_batches():
            if cb.batch.digest in self.posted_digests:
                continue
            result = self.l1.post_batch(cb.batch, cb.sigs, self.config.f)
            self.posted_digests.add(cb.batch.digest)
            self.events.append({
                "ev": "batch_post", "member": member, "accepted": result.accepted,
                "reason": result.reason, "block_number": cb.batch.header.block_number,
                "time": self.now,
            })

    # -- main loop ------------------------------------------------------------------

    _GENERATORS = frozenset(
        {"submit", "heartbeat", "delayed_enqueue", "force_include", "crash", "restart"}
    )

    def run(self) -> None:
        observer = self._observer_member()
        seen_blocked: set[bytes] = set()
        seen_consensus: set[bytes] = set()
        seen_discarded: set[bytes] = set()
        # Past `duration` no new work is created, but in-flight deliveries
        # drain fully so every replica ends at the same stream position.
        while self._heap:
            ev = heapq.heappop(self._heap)
            self.now = max(self.now, ev.time)
            if ev.kind in self._GENERATORS and ev.time > self.config.duration:
                continue
            self._handle(ev)
            self._observe(observer, seen_blocked, seen_consensus, seen_discarded)

    def _observer_member(self) -> int:
        for i in range(self.config.n):
            if self.config.behavior(i) == "honest" and not any(
                m == i for m, _ in self.config.crashes
            ):
                return i
        return 0

    def _observe(self, member: int, seen_blocked: set[bytes], seen_consensus: set[bytes],
                 seen_discarded: set[bytes]) -> None:
        seq = self.drivers[member].seq
        for h, rec in seq.core.pending.items():
            if rec.consensus is not None and h not in seen_consensus:
                seen_consensus.add(h)
                self.events.append({
                    "ev": "consensus", "tx": h.hex(), "time": self.now,
                    "tau_ms": rec.consensus.t_ms, "member": rec.consensus.member,
                    "seq": rec.consensus.seq, "adjusted": rec.adjusted,
                    "stamps": sorted(
                        [s.t_ms, s.member, s.seq] for s in rec.stamps.values()
                    ),
                })
            if rec.blocked and h not in seen_blocked:
                seen_blocked.add(h)
                entry = {
                    "ev": "block", "tx": h.hex(), "time": self.now,
                    "forced": rec.l1_certified,
                }
                if rec.block is not None:
                    entry["height"] = rec.block.height
                    entry["timestamp"] = rec.block.timestamp
                self.events.append(entry)
            if rec.discarded is not None and h not in seen_discarded:
                seen_discarded.add(h)
                self.events.append({"ev": "discard", "tx": h.hex(), "time": self.now,
                                    "reason": rec.discarded})


def run_simulation(config: SimConfig) -> Simulation:
    sim = Simulation(config)
    sim.run()
    return sim


def event_log_lines(sim: Simulation) -> str:
    return "".join(json.dumps(e, separators=(",", ":"), sort_keys=True) + "\n"
                   for e in sim.events)
