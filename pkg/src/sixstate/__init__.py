"""Six-state QKD: twirl algebra, one-way key rates, CSS coset keys, simulation."""

from .bell import (
    BellDiagonal,
    PauliPattern,
    TwirlOp,
    bb84_symmetrize,
    binary_entropy,
    entropy4,
    from_bit_error_depolarizing,
    hadamard_conjugate,
    marginals_and_mutual_info,
    sample_pattern,
    six_state_symmetrize,
    t_conjugate,
)
from .errors import BracketError, ConfigError, DomainError
from .keyrate import (
    CatHashConfig,
    RateCurve,
    bb84_worst_case_rate,
    cat_hash_best,
    cat_hash_rate,
    rate_curve,
    six_state_hashing_rate,
    subroutine_a_decomposition,
    threshold,
)
from .protocol import ProtocolConfig, SimReport, epp_twirl_trace, run

__version__ = "0.1.0"
