"""Scenario configuration for the deterministic committee simulator.

Scenarios are plain JSON documents; `load_config` validates structure and
bounds (F < N/3, odd N, non-negative delays) and fills defaults.  See the
bundled files under `timeboost/sim/scenarios/` for worked examples.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

BEHAVIORS = ("honest", "crashed", "silent", "low_stamper", "non_signer")


class ConfigError(ValueError):
    """The scenario document is malformed or violates a protocol bound."""


@dataclass(frozen=True)
class TxScript:
    time: float
    user: int
    fee: float
    payload: bytes
    declared_fee: float | None = None  # differs from fee only in bad-fee tests
    internal: bool = False


@dataclass(frozen=True)
class DelayedScript:
    time: float
    payload: bytes


@dataclass
class SimConfig:
    name: str
    n: int = 5
    f: int = 1
    g: float = 0.5
    c: float = 1.0
    seed: int = 0
    duration: float = 10.0
    heartbeat_interval: float = 0.1
    latency_min: float = 0.02
    latency_max: float = 0.05
    broadcast_min: float = 0.005
    broadcast_max: float = 0.05
    clock_skew: float = 0.005
    adversaries: dict[int, str] = field(default_factory=dict)
    low_stamp_floor_ms: int = 500
    txs: list[TxScript] = field(default_factory=list)
    delayed: list[DelayedScript] = field(default_factory=list)
    finalize_delay: float = 0.1
    notice_delay: float = 0.05
    delayed_blind: bool = False
    force_include_time: float | None = None
    force_include_index: int = 0
    force_threshold: float = 1.0
    crashes: list[tuple[int, float]] = field(default_factory=list)
    restarts: list[tuple[int, float]] = field(default_factory=list)
    fetch_delay: float = 0.05
    batch_window: float = 60.0
    batch_max_bytes: int = 64 * 1024
    check_ordering: bool = True

    def behavior(self, member: int) -> str:
        return self.adversaries.get(member, "honest")


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def load_config(doc: dict[str, Any]) -> SimConfig:
    if not isinstance(doc, dict):
        raise ConfigError("scenario must be a JSON object")
    known = {
        "name", "n", "f", "g", "c", "seed", "duration", "heartbeat_interval",
        "latency", "broadcast_delay", "clock_skew", "adversaries",
        "low_stamp_floor_ms", "txs", "random_txs", "delayed", "finalize_delay",
        "notice_delay", "delayed_blind", "force_include", "force_threshold",
        "crashes", "restarts", "fetch_delay", "batch_window", "batch_max_bytes",
        "check_ordering",
    }
    unknown = set(doc) - known
    _require(not unknown, f"unknown scenario keys: {sorted(unknown)}")

    cfg = SimConfig(name=str(doc.get("name", "scenario")))
    cfg.n = int(doc.get("n", cfg.n))
    cfg.f = int(doc.get("f", cfg.f))
    _require(cfg.n >= 1 and cfg.n % 2 == 1, f"N must be odd and positive, got {cfg.n}")
    _require(0 <= cfg.f and cfg.f < cfg.n / 3, f"need F < N/3, got F={cfg.f}, N={cfg.n}")
    cfg.g = float(doc.get("g", cfg.g))
    cfg.c = float(doc.get("c", cfg.c))
    _require(cfg.g > 0 and cfg.c > 0, "g and c must be positive")
    cfg.seed = int(doc.get("seed", cfg.seed))
    cfg.duration = float(doc.get("duration", cfg.duration))
    cfg.heartbeat_interval = float(doc.get("heartbeat_interval", cfg.heartbeat_interval))
    _require(cfg.heartbeat_interval > 0, "heartbeat_interval must be positive")

    lat = doc.get("latency", {})
    cfg.latency_min = float(lat.get("min", cfg.latency_min))
    cfg.latency_max = float(lat.get("max", cfg.latency_max))
    bc = doc.get("broadcast_delay", {})
    cfg.broadcast_min = float(bc.get("min", cfg.broadcast_min))
    cfg.broadcast_max = float(bc.get("max", cfg.broadcast_max))
    cfg.clock_skew = float(doc.get("clock_skew", cfg.clock_skew))
    for lo, hi, what in (
        (cfg.latency_min, cfg.latency_max, "latency"),
        (cfg.broadcast_min, cfg.broadcast_max, "broadcast_delay"),
    ):
        _require(0 <= lo <= hi, f"{what} range must satisfy 0 <= min <= max")
    _require(cfg.clock_skew >= 0, "clock_skew must be non-negative")

    adversaries: dict[int, str] = {}
    for key, value in dict(doc.get("adversaries", {})).items():
        member = int(key)
        _require(0 <= member < cfg.n, f"adversary member {member} out of range")
        _require(value in BEHAVIORS, f"unknown behavior {value!r}")
        adversaries[member] = value
    _require(
        sum(1 for b in adversaries.values() if b != "honest") <= cfg.f,
        "more than F non-honest members",
    )
    cfg.adversaries = adversaries
    cfg.low_stamp_floor_ms = int(doc.get("low_stamp_floor_ms", cfg.low_stamp_floor_ms))

    txs: list[TxScript] = []
    for i, item in enumerate(doc.get("txs", [])):
        txs.append(
            TxScript(
                time=float(item["time"]),
                user=int(item.get("user", 0)),
                fee=float(item.get("fee", 0.0)),
                payload=bytes.fromhex(item.get("payload", "")) or f"tx{i}".encode(),
                declared_fee=(
                    float(item["declared_fee"]) if "declared_fee" in item else None
                ),
            )
        )
    rnd = doc.get("random_txs")
    if rnd is not None:
        count = int(rnd["count"])
        start = float(rnd.get("start", 0.5))
        spacing = float(rnd.get("spacing", 0.05))
        fee_max = float(rnd.get("fee_max", 0.0))
        users = int(rnd.get("users", 3))
        # Fees/payloads are derived below in the harness RNG-free so that the
        # scenario document fully determines the workload.
        for i in range(count):
            fee = 0.0 if fee_max == 0.0 else round(fee_max * ((i * 7919) % 1000) / 999.0, 6)
            txs.append(
                TxScript(
                    time=start + i * spacing,
                    user=i % users,
                    fee=fee,
                    payload=f"load-{i}".encode(),
                )
            )
    for tx in txs:
        _require(tx.time >= 0 and tx.fee >= 0, "tx time/fee must be non-negative")
    cfg.txs = txs

    cfg.delayed = [
        DelayedScript(time=float(item["time"]), payload=bytes.fromhex(item.get("payload", "00")))
        for item in doc.get("delayed", [])
    ]
    cfg.finalize_delay = float(doc.get("finalize_delay", cfg.finalize_delay))
    cfg.notice_delay = float(doc.get("notice_delay", cfg.notice_delay))
    cfg.delayed_blind = bool(doc.get("delayed_blind", cfg.delayed_blind))
    force = doc.get("force_include")
    if force is not None:
        cfg.force_include_time = float(force["time"])
        cfg.force_include_index = int(force.get("index", 0))
    cfg.force_threshold = float(doc.get("force_threshold", cfg.force_threshold))
    cfg.crashes = [(int(c["member"]), float(c["time"])) for c in doc.get("crashes", [])]
    cfg.restarts = [(int(c["member"]), float(c["time"])) for c in doc.get("restarts", [])]
    cfg.fetch_delay = float(doc.get("fetch_delay", cfg.fetch_delay))
    cfg.batch_window = float(doc.get("batch_window", cfg.batch_window))
    cfg.batch_max_bytes = int(doc.get("batch_max_bytes", cfg.batch_max_bytes))
    cfg.check_ordering = bool(doc.get("check_ordering", cfg.force_include_time is None))
    return cfg


def load_config_file(path: str | Path) -> SimConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return load_config(json.load(fh))


def bundled_scenario_names() -> list[str]:
    root = resources.files("timeboost.sim") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_bundled_scenario(name: str) -> SimConfig:
    root = resources.files("timeboost.sim") / "scenarios"
    path = root / f"{name}.json"
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(
            f"no bundled scenario {name!r}; available: {bundled_scenario_names()}"
        ) from None
    return load_config(json.loads(text))
