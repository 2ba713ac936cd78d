"""
One-way key rates and their thresholds
======================================

Compare the BB84 worst-case rate 1 - 2 H2(p), the six-state hashing rate
1 - S(depolarizing) and the cat-code-then-hash rates.
"""

import numpy as np

from sixstate.keyrate import (
    bb84_worst_case_rate,
    cat_hash_best,
    cat_hash_rate,
    six_state_hashing_rate,
    subroutine_a_decomposition,
    threshold,
)

for p in (0.0, 0.05, 0.1, 0.12):
    h_z, h_xz, r = subroutine_a_decomposition(p)
    print(
        f"p={p:<5} bb84={bb84_worst_case_rate(p):+.4f} six={six_state_hashing_rate(p):+.4f}"
        f"  (bit-flip rounds {h_z:.4f} + phase rounds {h_xz:.4f})"
    )

print()
print("thresholds")
print(f"  bb84       {threshold('bb84', tol=1e-9):.6f}")
print(f"  six-state  {threshold('six_state', tol=1e-9):.6f}")
for m in range(2, 8):
    print(f"  cat m={m}    {threshold(f'cat_m{m}', (0.1, 0.14), 1e-9):.6f}")

# Just above the hashing threshold the degenerate code still yields key.
p = 0.1265
rate, m = cat_hash_best(p)
print(f"\nat p={p}: hashing {six_state_hashing_rate(p):+.2e}, best cat (m={m}) {rate:+.2e}")

grid = np.linspace(0.12, 0.13, 6)
print("cat m=5 near the threshold:", [f"{cat_hash_rate(q, 5):+.1e}" for q in grid])
