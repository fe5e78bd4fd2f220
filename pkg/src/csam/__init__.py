"""Clustered sparse associative memories: clique storage and retrieval from corrupt probes."""

from .cliques import enumerate_probe_cliques, find_clique, partition_state, rank_cliques
from .corruption import ErrorSpec, erase, inject, trial_rng
from .dynamics import (
    RetrievalParams,
    init_erasure,
    joint,
    run_until_fixed,
    sum_of_max_step,
    sum_of_sum_step,
)
from .memory import (
    Clique,
    CliqueMemory,
    InvalidMessageError,
    NetworkConfig,
    NeuronRef,
    NotAMessageError,
    decode,
    encode,
)
from .retrieval import ALGORITHMS, RetrievalOutcome, retrieve

__version__ = "0.1.0"
