"""Score-based transaction sequencing with bid time boosts.

Core pieces: the scoring/ordering policy (`timeboost.score`), equilibrium
solvers for the induced bidding games (`timeboost.econ`), the decentralized
sequencer committee (`timeboost.committee`), a deterministic network
simulator (`timeboost.sim`), and an HTTP service plus CLI wrapping them.
"""

from .score import (
    DuplicateTransactionError,
    ScoreParams,
    SequencerError,
    SequencerQueue,
    TimeRegressionError,
    Transaction,
    order,
    release_time,
    score,
    time_boost,
)

__version__ = "0.1.0"

__all__ = [
    "DuplicateTransactionError",
    "ScoreParams",
    "SequencerError",
    "SequencerQueue",
    "TimeRegressionError",
    "Transaction",
    "order",
    "release_time",
    "score",
    "time_boost",
    "__version__",
]
