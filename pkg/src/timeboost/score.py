"""Score-based transaction ordering.

A transaction's score is the bid-dependent time boost minus its arrival
time; the sequencer emits pending transactions in decreasing score order,
holding each one just long enough that no later arrival can overtake it.
Arrival times are kept as integer microseconds so that ordering tie-breaks
never depend on float rounding.
"""

from __future__ import annotations

import heapq
import math
import threading
from dataclasses import dataclass, field
from typing import Iterable

MICROS = 1_000_000


class SequencerError(Exception):
    """Base class for ordering-contract violations."""


class DuplicateTransactionError(SequencerError):
    """A transaction id was pushed twice into the same queue."""


class TimeRegressionError(SequencerError):
    """emit() was called with a clock earlier than a previous call."""


@dataclass(frozen=True)
class ScoreParams:
    """Parameters of the bid-to-boost curve.

    g caps the boost in seconds: no bid can overcome an arrival deficit of
    g or more.  c is the bid at which the boost reaches g/2.
    """

    g: float = 0.5
    c: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.g) and self.g > 0):
            raise ValueError(f"g must be a positive finite number, got {self.g!r}")
        if not (math.isfinite(self.c) and self.c > 0):
            raise ValueError(f"c must be a positive finite number, got {self.c!r}")


@dataclass(frozen=True)
class Transaction:
    """A sequencing unit: unique id, arrival time (microseconds), bid, payload."""

    id: str
    t_us: int
    bid: float
    payload: bytes = b""

    def __post_init__(self) -> None:
        if self.t_us < 0:
            raise ValueError(f"arrival time must be non-negative, got {self.t_us}")
        if not (math.isfinite(self.bid) and self.bid >= 0):
            raise ValueError(f"bid must be a finite non-negative number, got {self.bid!r}")

    @classmethod
    def at_seconds(cls, id: str, t: float, bid: float, payload: bytes = b"") -> "Transaction":
        """Build a transaction from an arrival time in seconds."""
        return cls(id=id, t_us=round(t * MICROS), bid=bid, payload=payload)

    @property
    def t(self) -> float:
        """Arrival time in seconds."""
        return self.t_us / MICROS


def time_boost(bid: float, params: ScoreParams) -> float:
    """Seconds of score bonus bought by `bid`: g*b/(b+c), in [0, g).

    Strictly increasing and strictly concave in the bid; a zero bid buys
    nothing and no bid reaches the cap g.
    """
    if not (math.isfinite(bid) and bid >= 0):
        raise ValueError(f"bid must be a finite non-negative number, got {bid!r}")
    return params.g * bid / (bid + params.c)


def score(tx: Transaction, params: ScoreParams) -> float:
    """Ordering key: time boost minus arrival time. Higher goes first."""
    return time_boost(tx.bid, params) - tx.t_us / MICROS


def release_time(tx: Transaction, params: ScoreParams) -> float:
    """Earliest time the transaction can be emitted safely.

    Equal to t + (g - boost) = g - score: past this instant, no later
    arrival can reach a higher score than tx.
    """
    return tx.t_us / MICROS + (params.g - time_boost(tx.bid, params))


def _sort_key(tx: Transaction, params: ScoreParams) -> tuple:
    # Ties on score are broken by (arrival, id) ascending.
    return (-score(tx, params), tx.t_us, tx.id)


def order(txs: Iterable[Transaction], params: ScoreParams) -> list[Transaction]:
    """Linear order over a finite transaction set: decreasing score.

    Deterministic tie-break by (arrival, id) keeps the result a strict
    order even for quantized inputs.  The relative order of any pair is
    unaffected by which other transactions are present.
    """
    return sorted(txs, key=lambda tx: _sort_key(tx, params))


class _Counter:
    __slots__ = ("value",)

    def __init__(self) -> None:
        self.value = 0


class _Entry:
    """Heap entry whose comparisons are counted, for complexity checks."""

    __slots__ = ("key", "tx", "stats")

    def __init__(self, key: tuple, tx: Transaction, stats: _Counter) -> None:
        self.key = key
        self.tx = tx
        self.stats = stats

    def __lt__(self, other: "_Entry") -> bool:
        self.stats.value += 1
        return self.key < other.key


class SequencerQueue:
    """Max-priority pending pool with release-time-gated emission.

    Any number of producers may push concurrently; `emit` is the single
    consumer and must see a non-decreasing clock.  Space is linear in the
    number of pending transactions and each push/pop costs O(log n)
    comparisons.
    """

    def __init__(self, params: ScoreParams) -> None:
        self.params = params
        self._heap: list[_Entry] = []
        self._ids: set[str] = set()
        self._lock = threading.Lock()
        self._last_now = -math.inf
        self._stats = _Counter()
        self.emitted_count = 0

    def __len__(self) -> int:
        return len(self._heap)

    @property
    def comparisons(self) -> int:
        """Total key comparisons performed so far (push and emit)."""
        return self._stats.value

    def push(self, tx: Transaction) -> None:
        with self._lock:
            if tx.id in self._ids:
                raise DuplicateTransactionError(f"transaction {tx.id!r} already pending")
            self._ids.add(tx.id)
            heapq.heappush(self._heap, _Entry(_sort_key(tx, self.params), tx, self._stats))

    def peek(self) -> Transaction | None:
        with self._lock:
            return self._heap[0].tx if self._heap else None

    def emit(self, now: float) -> list[Transaction]:
        """Emit, in decreasing score order, every pending transaction whose
        release time has passed.  Emission is final."""
        with self._lock:
            if now < self._last_now:
                raise TimeRegressionError(f"clock went backwards: {now} < {self._last_now}")
            self._last_now = now
            out: list[Transaction] = []
            while self._heap and release_time(self._heap[0].tx, self.params) <= now:
                tx = heapq.heappop(self._heap).tx
                self._ids.discard(tx.id)
                out.append(tx)
            self.emitted_count += len(out)
            return out
