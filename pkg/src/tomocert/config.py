"""Numerical tolerances shared across the package.

All tolerances live in one record so that a single object controls every
validity check.  The module-level ``TOL`` instance is the default used
throughout; callers needing looser or tighter checks can pass their own
``Tolerances`` to the validators that accept one.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12
    eigenvalue_floor: float = -1e-10
    trace: float = 1e-10
    unitarity: float = 1e-10
    povm_completeness: float = 1e-10
    projector_trace: float = 1e-10
    projector_rank: float = 1e-10
    rank_cutoff: float = 1e-12
    log_roundtrip: float = 1e-8
    prob_floor: float = 1e-14
    scvx_clamp: float = 1e-10
    constraint_prune: float = 1e-10
    sdp_gap: float = 1e-8
    ic_epsilon: float = 1e-3


TOL = Tolerances()
