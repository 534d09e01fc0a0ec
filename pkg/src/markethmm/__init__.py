"""HMM toolkit for next-day stock close prediction on OHLC data."""

from markethmm.hmm import (
    BaumWelchConfig,
    ForwardResult,
    HmmParameters,
    PosteriorSet,
    TrainingError,
    backward,
    baum_welch,
    chain_evolve,
    forward,
    posteriors,
    sample,
    viterbi,
)

__all__ = [
    "BaumWelchConfig",
    "ForwardResult",
    "HmmParameters",
    "PosteriorSet",
    "TrainingError",
    "backward",
    "baum_welch",
    "chain_evolve",
    "forward",
    "posteriors",
    "sample",
    "viterbi",
]

__version__ = "0.1.0"
