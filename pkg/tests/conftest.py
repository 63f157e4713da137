"""Shared first-principles oracles for the test suite.

Everything here recomputes model quantities the slow, obvious way: explicit
loops over permutations, flip patterns, and read outcomes.  Library results
are checked against these, never against themselves.
"""

import numpy as np


def brute_pattern_probability(energies: np.ndarray, pattern: int) -> float:
    """P{flip pattern} as a plain per-bit product."""
    p = 1.0
    for j, e in enumerate(energies):
        q = 2.0 ** (-e)
        p *= q if (pattern >> j) & 1 else 1.0 - q
    return p


def brute_error(table, energies, group, decoder, i: int, loss: str) -> float:
    """Per-input error from the definition: average over the group's
    elements and all flip patterns."""
    n = table.n
    total = 0.0
    elements = group.elements()
    for sigma in elements:
        permuted = energies.entries[np.asarray(sigma)]
        for d in range(1 << n):
            p = brute_pattern_probability(permuted, d)
            decoded = int(decoder.decode_map[i ^ d])
            truth = int(table.outputs[i])
            if loss == "exact":
                w = float(decoded != truth)
            else:
                w = float(abs(decoded - truth))
            total += p * w
    return total / len(elements)


def brute_map_scores(table, energies, group, observed: int, prior=None) -> dict:
    """Posterior mass per output value, summing likelihoods row by row."""
    n = table.n
    if prior is None:
        prior = np.full(1 << n, 1.0 / (1 << n))
    elements = group.elements()
    scores = {}
    for i in range(1 << n):
        like = 0.0
        for sigma in elements:
            permuted = energies.entries[np.asarray(sigma)]
            like += brute_pattern_probability(permuted, i ^ observed)
        like /= len(elements)
        v = int(table.outputs[i])
        scores[v] = scores.get(v, 0.0) + prior[i] * like
    return scores


def brute_map_decode(table, energies, group, observed: int, prior=None):
    """(winning value, margin over the runner-up); ties break to smaller."""
    scores = brute_map_scores(table, energies, group, observed, prior)
    top = max(scores.values())
    best = min(v for v in scores if scores[v] == top)
    others = [s for v, s in scores.items() if v != best]
    margin = top - max(others) if others else float("inf")
    return best, margin


def brute_pair_wrong(x: int, y: int, x_energies, y_energies) -> float:
    """Wrong-verdict probability of the pooled most-significant-first scan,
    by recursion over read outcomes."""
    x_energies = np.asarray(x_energies, dtype=float)
    y_energies = np.asarray(y_energies, dtype=float)
    k = x_energies.size
    p = 2.0 ** (-(x_energies + y_energies))
    want = (x > y) - (x < y)

    def walk(j: int, mass: float) -> float:
        if j < 0:
            # every position read as a tie; verdict "equal"
            return mass if want != 0 else 0.0
        xb = (x >> j) & 1
        yb = (y >> j) & 1
        t = (xb > yb) - (xb < yb)
        wrong = 0.0
        if t == 0:
            # misread tie decides either way with half the error mass each
            if want != 1:
                wrong += mass * p[j] / 2.0
            if want != -1:
                wrong += mass * p[j] / 2.0
            wrong += walk(j - 1, mass * (1.0 - p[j]))
        else:
            if want != t:
                wrong += mass * (1.0 - p[j])
            if want != -t:
                wrong += mass * p[j]
        return wrong

    return walk(k - 1, 1.0)
