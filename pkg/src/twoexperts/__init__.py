"""Optimal fixed-horizon prediction with two experts.

The erfc player, Cover's dynamic-programming player, adversary generators,
a game engine and a suite of independent oracles.
"""

from .adversaries import (CostSequence, random_general, random_restricted, seq_from_bits,
                          worst_case_sequence, worst_case_table, worst_case_value)
from .engine import Transcript, play, play_batch, regret, regret_bound
from .errors import DomainError, InvariantViolation, ResourceError
from .policies import (GapPolicy, build_cover_tables, make_continuous_policy, make_cover_policy,
                       make_erfc_policy, make_mwu_policy, make_policy, make_uniform_policy)
from .potentials import erfc, policy_q, potential_Q, potential_R

__version__ = "0.1.0"
