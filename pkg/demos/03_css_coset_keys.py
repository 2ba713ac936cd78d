"""
Coset keys from a nested code pair
==================================

Alice sends raw bits v. She picks a random codeword u of C1 and announces
u + v. Bob holds v + e, recovers u + e, corrects it to a codeword of C1 and
takes its coset of C2 as the key.
"""

import numpy as np

from sixstate.codes import (
    bits_to_str,
    coset_key_extract,
    coset_label,
    ml_hash_decode,
    random_parity_hash,
    steane_pair,
)

css = steane_pair()
print(f"C1: [{css.c1.n},{css.c1.k}] corrects t={css.c1.t}; C2: [{css.c2.n},{css.c2.k}]; key bits per block: {css.key_length}")

rng = np.random.default_rng(0)
v = rng.integers(0, 2, 7, dtype=np.uint8)
u = css.c1.encode(rng.integers(0, 2, css.c1.k, dtype=np.uint8))
for e in ([0] * 7, [0, 0, 1, 0, 0, 0, 0], [1, 0, 0, 0, 0, 1, 0]):
    e = np.array(e, dtype=np.uint8)
    key, ok = coset_key_extract(css, u ^ v, v ^ e)
    print(f"error {bits_to_str(e)}: Alice {bits_to_str(coset_label(css, u))}  Bob {bits_to_str(key)}  decoded={ok}")

# Random parity hashing: identify a sparse error pattern from a few parities.
pattern = np.zeros(16, dtype=np.uint8)
pattern[[2, 9]] = 1
for rounds in (8, 11, 13, 16):
    rows, par = random_parity_hash(pattern, rounds, rng_seed=rounds)
    guess, unique = ml_hash_decode(rows, par, prior_p=0.125)
    print(f"{rounds:2d} parities -> {bits_to_str(guess)} unique={unique} correct={np.array_equal(guess, pattern)}")
