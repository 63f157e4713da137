"""Permutation adversaries over energy assignments.

An adversary draws a permutation sigma uniformly from a fixed group and
rewires the energy vector so that bit j is read at energy entries[sigma[j]].
The identity group models a clairvoyant designer (assignments stick); the
full symmetric group models a blindfolded one (any rewiring is equally
likely); smaller generated groups interpolate.

The workhorse is :func:`average_pattern_probabilities`: the probability of
each flip pattern d, averaged over the group.  Independence across bits
makes the observation of input i land on i XOR d with a probability that
depends only on d, so the group average is a single 2**n vector shared by
every input.  For the full symmetric group it collapses to a function of
popcount(d) (a Poisson binomial), which keeps exact blindfolded analysis
polynomial in n instead of factorial.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from .bits import ResourceLimitError, as_rng, popcount_table
from .noise import EnergyVector, flip_probability, pattern_probabilities

SYMMETRIC_ENUM_LIMIT = 9          # 9! = 362880 explicit elements
GENERATED_ORDER_LIMIT = 1_000_000  # closure size guard
EXACT_OPS_LIMIT = 50_000_000       # order * 2**n guard for generated averages

GROUP_KINDS = ("identity", "symmetric", "generated")


class PermutationGroup:
    """Base: a subgroup of S_n acting on bit positions."""

    kind: str
    n: int

    def order(self) -> int:
        raise NotImplementedError

    def elements(self) -> np.ndarray:
        """All elements, one permutation per row."""
        raise NotImplementedError

    def sample(self, count: int, rng=None) -> np.ndarray:
        """Uniform draws, one permutation per row."""
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n})"


class IdentityGroup(PermutationGroup):
    """The trivial group: energies stay where they were assigned."""

    kind = "identity"

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.n = int(n)

    def order(self) -> int:
        return 1

    def elements(self) -> np.ndarray:
        return np.arange(self.n, dtype=np.int64)[None, :]

    def sample(self, count: int, rng=None) -> np.ndarray:
        return np.tile(np.arange(self.n, dtype=np.int64), (count, 1))


class FullSymmetricGroup(PermutationGroup):
    """All of S_n: the adversary may rewire energies arbitrarily."""

    kind = "symmetric"

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.n = int(n)

    def order(self) -> int:
        return math.factorial(self.n)

    def elements(self) -> np.ndarray:
        if self.n > SYMMETRIC_ENUM_LIMIT:
            raise ResourceLimitError(
                f"enumerating S_{self.n} ({math.factorial(self.n)} elements) exceeds "
                f"the n <= {SYMMETRIC_ENUM_LIMIT} guard; use sample() or the "
                f"closed-form averages instead")
        return np.array(list(itertools.permutations(range(self.n))), dtype=np.int64)

    def sample(self, count: int, rng=None) -> np.ndarray:
        base = np.tile(np.arange(self.n, dtype=np.int64), (count, 1))
        return as_rng(rng).permuted(base, axis=1)


class GeneratedGroup(PermutationGroup):
    """Subgroup generated by explicit permutations (closure by products).

    Finite order makes inverses reachable as powers, so products alone
    close the group.  The closure is capped at GENERATED_ORDER_LIMIT.
    """

    kind = "generated"

    def __init__(self, n: int, generators: Sequence[Sequence[int]]):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.n = int(n)
        gens = [self._check_perm(g) for g in generators]
        identity = tuple(range(self.n))
        seen = {identity}
        frontier = [identity]
        while frontier:
            nxt = []
            for p in frontier:
                for g in gens:
                    q = tuple(p[g[j]] for j in range(self.n))
                    if q not in seen:
                        seen.add(q)
                        nxt.append(q)
                        if len(seen) > GENERATED_ORDER_LIMIT:
                            raise ResourceLimitError(
                                f"generated group exceeds {GENERATED_ORDER_LIMIT} elements")
            frontier = nxt
        self._elements = np.array(sorted(seen), dtype=np.int64)
        self.generators = [tuple(g) for g in gens]

    def _check_perm(self, g) -> tuple:
        g = tuple(int(x) for x in g)
        if sorted(g) != list(range(self.n)):
            raise ValueError(f"not a permutation of 0..{self.n - 1}: {g!r}")
        return g

    def order(self) -> int:
        return int(self._elements.shape[0])

    def elements(self) -> np.ndarray:
        return self._elements

    def sample(self, count: int, rng=None) -> np.ndarray:
        idx = as_rng(rng).integers(self.order(), size=count)
        return self._elements[idx]


def build_group(kind: str, n: int, generators=None) -> PermutationGroup:
    if kind == "identity":
        return IdentityGroup(n)
    if kind == "symmetric":
        return FullSymmetricGroup(n)
    if kind == "generated":
        if not generators:
            raise ValueError("generated groups need at least one generator")
        return GeneratedGroup(n, generators)
    raise ValueError(f"unknown group kind {kind!r}; expected one of {GROUP_KINDS}")


def sample_energy_assignments(group: PermutationGroup, energies: EnergyVector,
                              count: int, rng=None) -> np.ndarray:
    """Matrix of adversarially rewired energy rows, entries[sigma[j]] at j."""
    if energies.n != group.n:
        raise ValueError(f"group acts on {group.n} bits, energies have {energies.n}")
    sigmas = group.sample(count, rng)
    return energies.entries[sigmas]


def _mismatch_count_weights(q: np.ndarray) -> np.ndarray:
    """P{exactly m bits flip}, m = 0..n (Poisson binomial via convolution)."""
    a = np.array([1.0])
    for qj in q:
        a = np.convolve(a, np.array([1.0 - qj, qj]))
    return a


def average_pattern_probabilities(group: PermutationGroup,
                                  energies: EnergyVector) -> np.ndarray:
    """Group-averaged probability of each flip pattern d in 0..2**n-1.

    The observation of input i is i XOR d with this probability, uniformly
    over the adversary's draw.  Identity reduces to the plain channel;
    the full symmetric group averages to a[popcount(d)] / C(n, popcount(d))
    where a is the flip-count distribution, exactly and without enumerating
    n! permutations; generated groups average their explicit elements.
    """
    if energies.n != group.n:
        raise ValueError(f"group acts on {group.n} bits, energies have {energies.n}")
    n = group.n
    if isinstance(group, IdentityGroup):
        return pattern_probabilities(energies)
    if isinstance(group, FullSymmetricGroup):
        q = flip_probability(energies)
        a = _mismatch_count_weights(q)
        m = popcount_table(n)
        counts = np.array([math.comb(n, k) for k in range(n + 1)], dtype=np.float64)
        return a[m] / counts[m]
    order = group.order()
    if order * (1 << n) > EXACT_OPS_LIMIT:
        raise ResourceLimitError(
            f"averaging {order} elements over 2**{n} patterns exceeds the exact guard")
    total = np.zeros(1 << n)
    for sigma in group.elements():
        total += pattern_probabilities(energies.permuted(sigma))
    return total / order


def marginal_flip_probability(group: PermutationGroup,
                              energies: EnergyVector) -> np.ndarray:
    """Per-bit flip probability averaged over the adversary's draw."""
    if energies.n != group.n:
        raise ValueError(f"group acts on {group.n} bits, energies have {energies.n}")
    q = flip_probability(energies)
    if isinstance(group, IdentityGroup):
        return q
    if isinstance(group, FullSymmetricGroup):
        return np.full(group.n, q.mean())
    return q[group.elements()].mean(axis=0)


def amgm_bound(energies: EnergyVector) -> float:
    """Lower bound 2**-(budget/n) on the mean per-bit flip probability.

    Convexity of 2**-e puts the average of the per-bit flip probabilities at
    or above the flip probability of the average energy, with equality only
    for uniform energies.
    """
    return float(2.0 ** (-energies.budget / energies.n))
