"""Independent reference computations used to freeze and cross-check values.

Nothing here imports the implementation under test.
"""

import itertools

import mpmath

mpmath.mp.dps = 40

# Pauli labels per error class, slot order (I, X, Z, Y)
PAULI_OF_CLASS = ("I", "X", "Z", "Y")


def mp_entropy(probs):
    total = mpmath.mpf(0)
    for p in probs:
        p = mpmath.mpf(p)
        if p > 0:
            total -= p * mpmath.log(p, 2)
    return total


def mp_h2(p):
    return mp_entropy([p, 1 - mpmath.mpf(p)])


def mp_depolarizing(p):
    p = mpmath.mpf(p)
    return [1 - 3 * p / 2, p / 2, p / 2, p / 2]


def mutual_info_from_joint(probs):
    """I(bitflip; phase) from the 2x2 joint table, class order (I, X, Z, Y)."""
    a, b, c, d = (mpmath.mpf(x) for x in probs)
    # joint[bitflip][phase]
    joint = {(0, 0): a, (1, 0): b, (0, 1): c, (1, 1): d}
    pz = {z: joint[(z, 0)] + joint[(z, 1)] for z in (0, 1)}
    px = {x: joint[(0, x)] + joint[(1, x)] for x in (0, 1)}
    total = mpmath.mpf(0)
    for (z, x), pj in joint.items():
        if pj > 0:
            total += pj * mpmath.log(pj / (pz[z] * px[x]), 2)
    return total


def conjugate_by_cycle(probs, cycle):
    """Push class probabilities through a Pauli relabeling given as a dict."""
    out = dict.fromkeys(PAULI_OF_CLASS, 0.0)
    for label, p in zip(PAULI_OF_CLASS, probs):
        out[cycle[label]] += p
    return tuple(out[label] for label in PAULI_OF_CLASS)


T_CYCLE = {"I": "I", "X": "Y", "Y": "Z", "Z": "X"}
H_SWAP = {"I": "I", "X": "Z", "Z": "X", "Y": "Y"}


def cat_rate_bruteforce(p, m):
    """Cat-code-then-hash rate by enumerating all 4**m Pauli words.

    A word is (x bits, z bits). Its syndrome is the adjacent X-parities; its
    logical class is (first x bit, parity of z). Probabilities are products of
    per-qubit depolarizing weights.
    """
    weights = {(0, 0): 1 - 1.5 * p, (1, 0): p / 2, (0, 1): p / 2, (1, 1): p / 2}
    table = {}
    for word in itertools.product(weights, repeat=m):
        prob = 1.0
        for q in word:
            prob *= weights[q]
        xs = [q[0] for q in word]
        zs = [q[1] for q in word]
        syn = tuple(xs[i] ^ xs[i + 1] for i in range(m - 1))
        logical = (xs[0], sum(zs) % 2)
        table.setdefault(syn, {}).setdefault(logical, 0.0)
        table[syn][logical] += prob
    cond = 0.0
    for dist in table.values():
        ps = sum(dist.values())
        cond += ps * float(mp_entropy([v / ps for v in dist.values()]))
    return (1 - cond) / m


def nearest_codewords(codewords, word):
    """All codewords at minimum Hamming distance from ``word``."""
    dists = [sum(a ^ b for a, b in zip(c, word)) for c in codewords]
    best = min(dists)
    return [tuple(c) for c, dist in zip(codewords, dists) if dist == best], best


def span(rows, n):
    out = {tuple([0] * n)}
    for r in rows:
        out |= {tuple(a ^ b for a, b in zip(v, r)) for v in out}
    return out
