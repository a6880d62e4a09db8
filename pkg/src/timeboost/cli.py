"""Command-line client for the timeboost service.

Subcommands: `sequence` (order a JSONL transaction file), `econ`
(equilibrium tables as CSV), `sim` (run a committee scenario), `bench`
(batch-auction comparison), and `serve` (run the HTTP service).  All
commands talk to the service API: against `--server URL` when given,
otherwise against an in-process instance, so outputs are identical either
way.  Exit codes: 0 success, 1 invariant violation, 2 usage/input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

from .feed import FeedFormatError, parse_transactions


class _Client:
    """Minimal POST client over a remote URL or the in-process app."""

    def __init__(self, server: str | None) -> None:
        if server:
            import httpx

            self._client = httpx.Client(base_url=server.rstrip("/"), timeout=300.0)
        else:
            from fastapi.testclient import TestClient

            from .service import create_app

            self._client = TestClient(create_app(), raise_server_exceptions=False)

    def post(self, path: str, payload: dict[str, Any]) -> dict[str, Any]:
        resp = self._client.post(path, json=payload)
        if resp.status_code >= 400:
            try:
                detail = resp.json().get("detail", resp.text)
            except ValueError:
                detail = resp.text
            raise CommandError(f"{path} failed ({resp.status_code}): {detail}")
        return resp.json()


class CommandError(Exception):
    """Input or parameter problem; maps to exit code 2."""


def _print_config(args: argparse.Namespace, keys: list[str]) -> None:
    resolved = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    print(f"config: {json.dumps(resolved, sort_keys=True)}", file=sys.stderr)


def _write_out(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _csv(header: str, rows: list[list[Any]]) -> str:
    lines = [header]
    lines += [",".join(repr(x) if isinstance(x, float) else str(x) for x in row) for row in rows]
    return "\n".join(lines) + "\n"


# -- subcommands -------------------------------------------------------------


def cmd_sequence(args: argparse.Namespace, client: _Client) -> int:
    _print_config(args, ["input", "out", "g", "c"])
    try:
        lines = Path(args.input).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise CommandError(f"cannot read {args.input}: {exc}")
    txs = parse_transactions(lines)  # line-numbered validation
    payload = {
        "params": {"g": args.g, "c": args.c},
        "transactions": [
            {"id": tx.id, "t": tx.t, "bid": tx.bid, "payload": tx.payload.hex()} for tx in txs
        ],
    }
    body = client.post("/sequence", payload)
    text = "".join(json.dumps(row, separators=(",", ":")) + "\n" for row in body["feed"])
    _write_out(text, args.out)
    return 0


def cmd_econ(args: argparse.Namespace, client: _Client) -> int:
    task = args.task
    if task == "curves":
        _print_config(args, ["task", "g", "n", "grid", "out"])
        body = client.post("/econ/curves", {"g": args.g, "n": args.n, "grid": args.grid})
        rows = [[r["v"], r["s"], r["m"], r["latency_spend"], r["total_cost"]]
                for r in body["rows"]]
        _write_out(_csv("v,s,m,latency_spend,total_cost", rows), args.out)
    elif task == "bg_sweep":
        _print_config(args, ["task", "g_values", "n", "out"])
        g_values = [float(x) for x in args.g_values.split(",")] if args.g_values else \
            [1e3, 1e4, 1e5, 1e6]
        body = client.post("/econ/bg-sweep", {"g_values": g_values, "n": args.n})
        rows = [[r["g"], r["b_g"], r["latency_share"]] for r in body["rows"]]
        _write_out(_csv("g,b_g,latency_share", rows), args.out)
    elif task == "partial_sep":
        _print_config(args, ["task", "g", "delta", "grid", "out"])
        body = client.post(
            "/econ/partial-separation",
            {"g": args.g, "delta": args.delta, "grid": args.grid, "points": args.points},
        )
        rows = [[r["v"], r["pi1"], r["pi2"], r["signal1"], r["signal2"]] for r in body["rows"]]
        _write_out(_csv("v,pi1,pi2,signal1,signal2", rows), args.out)
        print(f"threshold: {body['threshold']!r}", file=sys.stderr)
    elif task == "rev_equiv":
        _print_config(args, ["task", "n", "tech", "g", "out"])
        body = client.post(
            "/econ/revenue-equivalence",
            {"n": args.n, "grid": args.grid, "tech": args.tech, "g": args.g, "shift": args.shift},
        )
        rows = [[body["n"], body["tech"], body["expected_spend"], body["total_spend"],
                 body["analytic_expected"], body["max_deviation"]]]
        _write_out(_csv("n,tech,expected_spend,total_spend,analytic_expected,max_deviation", rows),
                   args.out)
    elif task == "payoff_equiv":
        _print_config(args, ["task", "n", "trials", "seed", "out"])
        body = client.post(
            "/econ/payoff-equivalence", {"n": args.n, "trials": args.trials, "seed": args.seed}
        )
        rows = [[body["n"], body["trials"], body["allpay"], body["firstprice"], body["gap"],
                 body["gap_se"]]]
        _write_out(_csv("n,trials,allpay,firstprice,gap,gap_se", rows), args.out)
        if not body["within_3se"]:
            print("warning: payoff gap exceeds 3 Monte Carlo standard errors", file=sys.stderr)
            return 1
    else:  # pragma: no cover - argparse restricts choices
        raise CommandError(f"unknown econ task {task!r}")
    return 0


def cmd_sim(args: argparse.Namespace, client: _Client) -> int:
    _print_config(args, ["config", "out", "log"])
    payload: dict[str, Any] = {"include_events": args.log is not None}
    path = Path(args.config)
    if path.exists():
        try:
            payload["config"] = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise CommandError(f"cannot load scenario {args.config}: {exc}")
    else:
        payload["scenario"] = args.config  # bundled name
    body = client.post("/sim/run", payload)
    metrics_text = json.dumps(body["metrics"], indent=2, sort_keys=True) + "\n"
    _write_out(metrics_text, args.out)
    if args.log is not None:
        events = body.get("events") or []
        text = "".join(json.dumps(e, separators=(",", ":"), sort_keys=True) + "\n" for e in events)
        Path(args.log).write_text(text, encoding="utf-8")
    if not body["ok"]:
        print("invariant violations:", file=sys.stderr)
        for v in body["violations"]:
            print(f"  - {v}", file=sys.stderr)
        return 1
    return 0


def cmd_bench(args: argparse.Namespace, client: _Client) -> int:
    _print_config(args, ["g", "s1", "s2", "trials", "seed", "out"])
    body = client.post(
        "/bench",
        {"g": args.g, "s1": args.s1, "s2": args.s2, "trials": args.trials, "seed": args.seed},
    )
    print(f"exclusion window fraction : {body['window_fraction']!r}")
    print(f"batch avg delay           : {body['batch_avg_delay']!r}")
    print(f"continuous avg delay      : {body['continuous_avg_delay']!r}")
    print(f"latency importance vs L1  : {body['latency_importance_vs_l1']!r}")
    if args.out:
        rows = [[body["g"], body["s1"], body["s2"], body["window_fraction"],
                 body["batch_avg_delay"], body["continuous_avg_delay"],
                 body["latency_importance_vs_l1"]]]
        _write_out(
            _csv("g,s1,s2,window_fraction,batch_avg_delay,continuous_avg_delay,importance", rows),
            args.out,
        )
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return 0


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="timeboost", description=__doc__.split("\n")[0])
    parser.add_argument("--server", default=None,
                        help="service URL; default runs the service in-process")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sequence", help="order a JSONL transaction file")
    p.add_argument("--in", dest="input", required=True, help="input JSONL path")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--g", type=float, default=0.5)
    p.add_argument("--c", type=float, default=1.0)

    p = sub.add_parser("econ", help="equilibrium tables as CSV")
    p.add_argument("task", choices=["curves", "bg_sweep", "partial_sep", "rev_equiv",
                                    "payoff_equiv"])
    p.add_argument("--g", type=float, default=100.0)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--grid", type=int, default=2001)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--g-values", dest="g_values", default=None,
                   help="comma-separated g list for bg_sweep")
    p.add_argument("--tech", choices=["time_boost", "linear"], default="time_boost")
    p.add_argument("--shift", type=float, default=0.0)
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("sim", help="run a committee scenario")
    p.add_argument("--config", required=True,
                   help="scenario JSON path or bundled scenario name")
    p.add_argument("--out", default=None, help="metrics JSON output (default stdout)")
    p.add_argument("--log", default=None, help="write the event log (JSONL) here")

    p = sub.add_parser("bench", help="block-to-block auction comparison")
    p.add_argument("--g", type=float, default=0.5)
    p.add_argument("--s1", type=float, default=0.01)
    p.add_argument("--s2", type=float, default=0.02)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "serve":
            return cmd_serve(args)
        client = _Client(args.server)
        if args.command == "sequence":
            return cmd_sequence(args, client)
        if args.command == "econ":
            return cmd_econ(args, client)
        if args.command == "sim":
            return cmd_sim(args, client)
        if args.command == "bench":
            return cmd_bench(args, client)
        parser.error(f"unknown command {args.command!r}")
    except FeedFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
