"""FastAPI service exposing the sequencer, the solvers, and the simulator.

Domain errors (out-of-range parameters, malformed scenarios) surface as
HTTP 400 with the library's message; schema violations are FastAPI's
usual 422.  Every endpoint is deterministic given its request body.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..econ import (
    DomainError,
    SignalTech,
    bidding_share,
    block_auction_compare,
    expost_equilibrium,
    partial_separation_solve,
    payoff_equivalence_mc,
    revenue_equivalence_check,
    time_boost_tech,
)
from ..feed import FeedFormatError, feed_rows
from ..score import ScoreParams, Transaction
from ..sim import ConfigError, collect_metrics, load_bundled_scenario, load_config, run_simulation
from . import schemas as S


def create_app() -> FastAPI:
    app = FastAPI(title="timeboost", version=__version__)

    @app.get("/healthz", response_model=S.HealthResponse)
    def healthz() -> S.HealthResponse:
        return S.HealthResponse(status="ok", version=__version__)

    @app.post("/sequence", response_model=S.SequenceResponse)
    def sequence(req: S.SequenceRequest) -> S.SequenceResponse:
        params = ScoreParams(g=req.params.g, c=req.params.c)
        txs = []
        seen: set[str] = set()
        for i, t in enumerate(req.transactions):
            if t.id in seen:
                raise HTTPException(400, f"transaction {i}: duplicate id {t.id!r}")
            seen.add(t.id)
            try:
                payload = bytes.fromhex(t.payload)
            except ValueError:
                raise HTTPException(400, f"transaction {i}: payload is not valid hex")
            txs.append(Transaction.at_seconds(t.id, t.t, t.bid, payload))
        rows = feed_rows(txs, params)
        return S.SequenceResponse(feed=[S.FeedEntry(**row) for row in rows])

    @app.post("/econ/curves", response_model=S.CurvesResponse)
    def econ_curves(req: S.CurvesRequest) -> S.CurvesResponse:
        try:
            curve = expost_equilibrium(req.g, req.n, req.grid)
        except DomainError as exc:
            raise HTTPException(400, str(exc))
        rows = [
            S.CurveRow(
                v=float(v),
                s=float(s) if math.isfinite(s) else -1e308,
                m=float(m),
                latency_spend=float(ls),
                total_cost=float(m + ls),
            )
            for v, s, m, ls in zip(curve.v, curve.s, curve.bid, curve.latency_spend)
        ]
        return S.CurvesResponse(marginal_type=curve.marginal_type, rows=rows)

    @app.post("/econ/bg-sweep", response_model=S.BgSweepResponse)
    def econ_bg_sweep(req: S.BgSweepRequest) -> S.BgSweepResponse:
        rows = []
        for g in req.g_values:
            try:
                share = bidding_share(g, req.n, req.grid)
            except DomainError as exc:
                raise HTTPException(400, f"g={g}: {exc}")
            rows.append(
                S.BgSweepRow(g=g, b_g=share.value, latency_share=share.latency_share,
                             no_bidding=share.no_bidding)
            )
        return S.BgSweepResponse(rows=rows)

    @app.post("/econ/partial-separation", response_model=S.PartialSepResponse)
    def econ_partial_sep(req: S.PartialSepRequest) -> S.PartialSepResponse:
        try:
            sep = partial_separation_solve(req.g, req.delta, req.grid)
        except DomainError as exc:
            raise HTTPException(400, str(exc))
        vs = np.linspace(sep.threshold, 1.0, req.points)
        p1 = sep.bid_of_value(1, vs)
        p2 = sep.bid_of_value(2, vs)
        s1 = sep.signal_of_value(1, vs)
        s2 = sep.signal_of_value(2, vs)
        rows = [
            S.PartialSepRow(v=float(v), pi1=float(a), pi2=float(b), signal1=float(x), signal2=float(y))
            for v, a, b, x, y in zip(vs, p1, p2, s1, s2)
        ]
        return S.PartialSepResponse(threshold=sep.threshold, rows=rows)

    @app.post("/econ/revenue-equivalence", response_model=S.RevEquivResponse)
    def econ_rev_equiv(req: S.RevEquivRequest) -> S.RevEquivResponse:
        if req.tech == "time_boost":
            tech = time_boost_tech(req.g)
        else:
            shift = req.shift
            tech = SignalTech(
                cost=lambda s: s + shift,
                marginal=lambda s: 1.0,
                inverse=lambda y: y - shift,
                name=f"linear(shift={shift})",
            )
        try:
            result = revenue_equivalence_check(tech, req.n, req.grid)
        except DomainError as exc:
            raise HTTPException(400, str(exc))
        analytic = (req.n - 1) / (req.n * (req.n + 1))
        return S.RevEquivResponse(
            expected_spend=result.expected_spend,
            total_spend=result.total_spend,
            max_deviation=result.max_deviation,
            analytic_expected=analytic,
            analytic_total=req.n * analytic,
            n=req.n,
            tech=result.tech_name,
        )

    @app.post("/econ/payoff-equivalence", response_model=S.PayoffEquivResponse)
    def econ_payoff_equiv(req: S.PayoffEquivRequest) -> S.PayoffEquivResponse:
        result = payoff_equivalence_mc(n=req.n, trials=req.trials, seed=req.seed)
        return S.PayoffEquivResponse(
            allpay=result.allpay_payoff,
            firstprice=result.firstprice_payoff,
            allpay_se=result.allpay_se,
            firstprice_se=result.firstprice_se,
            gap=result.gap,
            gap_se=result.gap_se,
            within_3se=result.gap <= 3.0 * result.gap_se,
            n=result.n,
            trials=result.trials,
        )

    @app.post("/bench", response_model=S.BenchResponse)
    def bench(req: S.BenchRequest) -> S.BenchResponse:
        try:
            m = block_auction_compare(req.g, req.s1, req.s2, trials=req.trials, seed=req.seed)
        except DomainError as exc:
            raise HTTPException(400, str(exc))
        return S.BenchResponse(
            window_fraction=m.window_fraction,
            batch_avg_delay=m.batch_avg_delay,
            continuous_avg_delay=m.continuous_avg_delay,
            latency_importance_vs_l1=m.latency_importance_vs_l1,
            g=m.g,
            s1=m.s1,
            s2=m.s2,
            trials=m.trials,
        )

    @app.post("/sim/run", response_model=S.SimResponse)
    def sim_run(req: S.SimRequest) -> S.SimResponse:
        if (req.config is None) == (req.scenario is None):
            raise HTTPException(400, "provide exactly one of `config` or `scenario`")
        try:
            cfg = load_config(req.config) if req.config is not None \
                else load_bundled_scenario(req.scenario)
        except ConfigError as exc:
            raise HTTPException(400, str(exc))
        sim = run_simulation(cfg)
        metrics = collect_metrics(sim)
        payload = dict(metrics.__dict__)
        payload["digests"] = {str(k): v for k, v in metrics.digests.items()}
        payload["epochs"] = {str(k): v for k, v in metrics.epochs.items()}
        return S.SimResponse(
            metrics=payload,
            ok=metrics.ok,
            violations=metrics.violations,
            events=sim.events if req.include_events else None,
        )

    return app


app = create_app()
