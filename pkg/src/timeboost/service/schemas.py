"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field


class ScoreParamsIn(BaseModel):
    g: float = Field(default=0.5, gt=0, description="maximum time boost, seconds")
    c: float = Field(default=1.0, gt=0, description="bid half-saturation constant")


class TxIn(BaseModel):
    id: str
    t: float = Field(ge=0, description="arrival time, seconds")
    bid: float = Field(ge=0)
    payload: str = Field(default="", description="hex-encoded payload")


class SequenceRequest(BaseModel):
    params: ScoreParamsIn = ScoreParamsIn()
    transactions: list[TxIn]


class FeedEntry(BaseModel):
    id: str
    score: float
    release_time: float
    position: int


class SequenceResponse(BaseModel):
    feed: list[FeedEntry]


class CurvesRequest(BaseModel):
    g: float = Field(gt=1)
    n: int = Field(default=2, ge=2)
    grid: int = Field(default=1001, ge=16, le=200_001)


class CurveRow(BaseModel):
    v: float
    s: float
    m: float
    latency_spend: float
    total_cost: float


class CurvesResponse(BaseModel):
    marginal_type: float
    rows: list[CurveRow]


class BgSweepRequest(BaseModel):
    g_values: list[float] = Field(min_length=1)
    n: int = Field(default=2, ge=2)
    grid: int = Field(default=2001, ge=16)


class BgSweepRow(BaseModel):
    g: float
    b_g: float
    latency_share: float
    no_bidding: bool


class BgSweepResponse(BaseModel):
    rows: list[BgSweepRow]


class PartialSepRequest(BaseModel):
    g: float = Field(gt=0)
    delta: float = Field(gt=0)
    grid: int = Field(default=2000, ge=16)
    points: int = Field(default=200, ge=2, description="valuation grid for the output table")


class PartialSepRow(BaseModel):
    v: float
    pi1: float
    pi2: float
    signal1: float
    signal2: float


class PartialSepResponse(BaseModel):
    threshold: float
    rows: list[PartialSepRow]


class RevEquivRequest(BaseModel):
    n: int = Field(default=2, ge=2)
    grid: int = Field(default=2001, ge=16)
    tech: Literal["time_boost", "linear"] = "time_boost"
    g: float = Field(default=100.0, gt=0, description="boost cap for the time_boost tech")
    shift: float = Field(default=0.0, description="offset for the linear tech")


class RevEquivResponse(BaseModel):
    expected_spend: float
    total_spend: float
    max_deviation: float
    analytic_expected: float
    analytic_total: float
    n: int
    tech: str


class PayoffEquivRequest(BaseModel):
    n: int = Field(default=2, ge=1)
    trials: int = Field(default=1_000_000, ge=10_000, le=50_000_000)
    seed: int = 0


class PayoffEquivResponse(BaseModel):
    allpay: float
    firstprice: float
    allpay_se: float
    firstprice_se: float
    gap: float
    gap_se: float
    within_3se: bool
    n: int
    trials: int


class BenchRequest(BaseModel):
    g: float = Field(default=0.5, gt=0)
    s1: float = Field(default=0.01, ge=0)
    s2: float = Field(default=0.02, ge=0)
    trials: int = Field(default=100_000, ge=1, le=10_000_000)
    seed: int = 0


class BenchResponse(BaseModel):
    window_fraction: float
    batch_avg_delay: float
    continuous_avg_delay: float
    latency_importance_vs_l1: float
    g: float
    s1: float
    s2: float
    trials: int


class SimRequest(BaseModel):
    config: dict[str, Any] | None = None
    scenario: str | None = Field(default=None, description="bundled scenario name")
    include_events: bool = False


class SimResponse(BaseModel):
    metrics: dict[str, Any]
    ok: bool
    violations: list[str]
    events: list[dict[str, Any]] | None = None


class HealthResponse(BaseModel):
    status: str
    version: str
