"""Basis finding for matroids under an independence oracle, counting adaptive rounds."""
from ._jit import NUMBA_ENABLED
from .algorithms import (RunResult, find_basis_37, greedy_basis, guaranteed_progress_decomposition,
                         kuw_basis, new_decomposition_49, run_algorithm, validate_basis)
from .applications import FeasibleSequence, random_feasible_sequence
from .config import AlgorithmConfig
from .instances import generate, load
from .matroids import DirectSum, Graphic, Linear, OracleMatroid, Partition, Uniform
from .oracle import MatroidView, first_circuit, greedy_rank, is_independent
from .scheduler import QueryBatch, RoundLedger, submit_batch

__version__ = "0.1.0"
