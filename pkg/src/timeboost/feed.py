"""JSONL transaction input and ordered-feed output.

Input: one JSON object per line with fields `id` (string), `t` (float
seconds), `bid` (float), `payload` (hex string).  Output: one JSON object
per line with `id`, `score`, `release_time`, `position`.
"""

from __future__ import annotations

import json
from typing import Iterable

from .score import ScoreParams, Transaction, order, release_time, score


class FeedFormatError(ValueError):
    """A malformed input line; carries the 1-based line number."""

    def __init__(self, lineno: int, reason: str) -> None:
        super().__init__(f"line {lineno}: {reason}")
        self.lineno = lineno
        self.reason = reason


def parse_transaction_line(line: str, lineno: int) -> Transaction:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise FeedFormatError(lineno, f"invalid JSON ({exc.msg})") from exc
    if not isinstance(obj, dict):
        raise FeedFormatError(lineno, "expected a JSON object")
    try:
        tx_id = obj["id"]
        t = obj["t"]
        bid = obj["bid"]
    except KeyError as exc:
        raise FeedFormatError(lineno, f"missing field {exc.args[0]!r}") from exc
    if not isinstance(tx_id, str):
        raise FeedFormatError(lineno, "id must be a string")
    if not isinstance(t, (int, float)) or isinstance(t, bool):
        raise FeedFormatError(lineno, "t must be a number")
    if not isinstance(bid, (int, float)) or isinstance(bid, bool):
        raise FeedFormatError(lineno, "bid must be a number")
    payload_hex = obj.get("payload", "")
    if not isinstance(payload_hex, str):
        raise FeedFormatError(lineno, "payload must be a hex string")
    try:
        payload = bytes.fromhex(payload_hex)
    except ValueError as exc:
        raise FeedFormatError(lineno, "payload is not valid hex") from exc
    try:
        return Transaction.at_seconds(tx_id, float(t), float(bid), payload)
    except ValueError as exc:
        raise FeedFormatError(lineno, str(exc)) from exc


def parse_transactions(lines: Iterable[str]) -> list[Transaction]:
    """Parse JSONL transaction lines; blank lines are skipped.

    Duplicate ids are rejected here so the failure names the line rather
    than surfacing later from the queue.
    """
    txs: list[Transaction] = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        tx = parse_transaction_line(line, lineno)
        if tx.id in seen:
            raise FeedFormatError(lineno, f"duplicate transaction id {tx.id!r}")
        seen.add(tx.id)
        txs.append(tx)
    return txs


def feed_rows(txs: Iterable[Transaction], params: ScoreParams) -> list[dict]:
    """Deterministic ordered feed for a transaction set."""
    return [
        {
            "id": tx.id,
            "score": score(tx, params),
            "release_time": release_time(tx, params),
            "position": pos,
        }
        for pos, tx in enumerate(order(txs, params))
    ]


def render_feed(rows: Iterable[dict]) -> str:
    return "".join(json.dumps(row, separators=(",", ":")) + "\n" for row in rows)
