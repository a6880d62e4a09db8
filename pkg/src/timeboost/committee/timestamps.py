"""Committee timestamps: (time, member, seq) triples with a total order."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class TimestampTriple:
    """A local timestamp: millisecond time, issuing member, tiebreak counter.

    Field order gives the protocol's total order: time first, then member
    identity, then the sequence counter.  Triples issued by one honest
    member strictly increase.
    """

    t_ms: int
    member: int
    seq: int

    @property
    def seconds(self) -> float:
        return self.t_ms / 1000.0


class TimestampIssuer:
    """Per-member issuer guaranteeing strictly increasing triples."""

    def __init__(self, member: int) -> None:
        self.member = member
        self._last: TimestampTriple | None = None

    @property
    def last(self) -> TimestampTriple | None:
        return self._last

    def resume_from(self, last: TimestampTriple | None) -> None:
        """Adopt a previously issued maximum (recovery after restart)."""
        if last is not None and (self._last is None or last > self._last):
            self._last = last

    def issue(self, clock_ms: int) -> TimestampTriple:
        t = clock_ms
        seq = 0
        if self._last is not None:
            if t < self._last.t_ms:
                # Clock fell behind our own history; stay monotone.
                t = self._last.t_ms
            if t == self._last.t_ms:
                seq = self._last.seq + 1
        stamp = TimestampTriple(t_ms=t, member=self.member, seq=seq)
        self._last = stamp
        return stamp
