"""
Twirling a Bell-diagonal pair state
===================================

A pair's error is one of four classes: none, bit flip (X), phase flip (Z)
or both (Y). Random Hadamards symmetrize X and Z; random I/T/T^2 rotate
all three and leave a depolarizing state behind.
"""

import numpy as np

from sixstate.bell import (
    BellDiagonal,
    bb84_symmetrize,
    entropy4,
    marginals_and_mutual_info,
    six_state_symmetrize,
    t_conjugate,
)
from sixstate.protocol import epp_twirl_trace

s = BellDiagonal(0.7, 0.2, 0.06, 0.04)
print("state           ", s.as_tuple())
print("T-conjugated    ", t_conjugate(s).as_tuple())
print("BB84 symmetrized", bb84_symmetrize(s).as_tuple())
print("6-state sym.    ", np.round(six_state_symmetrize(s).as_array(), 12))

# Twirling mixes permutations, so the entropy can only go up.
print(f"entropy before {entropy4(s):.5f} bits, after {entropy4(six_state_symmetrize(s)):.5f} bits")

# Sample the twirl pair by pair and compare with the exact average.
trace = epp_twirl_trace(100_000, s, rng_seed=1)
before, after = trace.frequencies()
print("sampled before", before)
print("sampled after ", after)

# Bit flips and phase flips: independent in BB84's worst case, correlated
# after the six-state twirl.
p = 0.12
worst = BellDiagonal((1 - p) ** 2, p * (1 - p), p * (1 - p), p * p)
print("I(X;Z) BB84 worst case:", marginals_and_mutual_info(worst)[2])
print("I(X;Z) six-state      :", marginals_and_mutual_info(six_state_symmetrize(worst))[2])
