"""Energy-driven bit-flip noise.

A bit read at energy e is misread with probability 2**-e, independently of
the other bits.  Energies are real numbers >= 0.

e = 0 is legal and means the bit flips with probability exactly 1: the read
is deterministic, just deterministically wrong.  Allocators and optimizers
must therefore treat "spend nothing on a bit" as "guarantee a flip there",
not as "ignore the bit".

Also provided: a supply-voltage correctness curve for CMOS-style reads,
p(vdd) = 1 - 0.5 * erfc(vdd / (2 * sqrt(2) * sigma)), which maps a hardware
knob onto the same per-bit correctness scale.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import erfc

from .bits import as_bit_array, as_rng


@dataclass(frozen=True)
class EnergyVector:
    """Per-bit read energies; entry j powers bit j."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.float64)
        if entries.ndim != 1 or entries.size == 0:
            raise ValueError("energies must form a nonempty 1-D vector")
        if not np.all(np.isfinite(entries)) or np.any(entries < 0):
            raise ValueError("energies must be finite and >= 0")
        entries = entries.copy()
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return int(self.entries.size)

    @property
    def budget(self) -> float:
        """Total energy spent across all bits."""
        return float(self.entries.sum())

    def permuted(self, sigma: Sequence[int]) -> "EnergyVector":
        """Reassign energies so bit j receives entry sigma[j]."""
        sigma = np.asarray(sigma, dtype=np.int64)
        if sorted(sigma.tolist()) != list(range(self.n)):
            raise ValueError(f"not a permutation of 0..{self.n - 1}: {sigma!r}")
        return EnergyVector(self.entries[sigma])


def energy_vector(entries: Sequence[float]) -> EnergyVector:
    return EnergyVector(np.asarray(entries, dtype=np.float64))


def flip_probability(energy) -> np.ndarray | float:
    """Per-bit misread probability 2**-e (e = 0 gives a certain flip)."""
    if isinstance(energy, EnergyVector):
        return np.exp2(-energy.entries)
    arr = np.asarray(energy, dtype=np.float64)
    if np.any(arr < 0):
        raise ValueError("energies must be >= 0")
    out = np.exp2(-arr)
    return float(out) if arr.ndim == 0 else out


def sample_observation(bits, energies: EnergyVector, rng=None) -> np.ndarray:
    """Read the input once through the channel: each bit flips w.p. 2**-e."""
    arr = as_bit_array(bits, energies.n)
    q = flip_probability(energies)
    flips = as_rng(rng).random(energies.n) < q
    return (arr ^ flips.astype(np.uint8)).astype(np.uint8)


def sample_observations(bits, energies: EnergyVector, count: int, rng=None) -> np.ndarray:
    """Matrix of `count` independent reads, one per row."""
    arr = as_bit_array(bits, energies.n)
    q = flip_probability(energies)
    flips = as_rng(rng).random((count, energies.n)) < q
    return (arr[None, :] ^ flips.astype(np.uint8)).astype(np.uint8)


def pattern_probabilities(energies: EnergyVector) -> np.ndarray:
    """Probability of each flip pattern d in 0..2**n-1.

    Entry d is prod_j q_j**d_j * (1-q_j)**(1-d_j); the observation of input
    i lands on i XOR d with exactly this probability.  Exact but 2**n long.
    """
    q = flip_probability(energies)
    probs = np.array([1.0])
    for j in range(energies.n):
        # little endian: bit j toggles with stride 2**j
        probs = np.concatenate([probs * (1.0 - q[j]), probs * q[j]])
    return probs


def observation_distribution(bits, energies: EnergyVector) -> np.ndarray:
    """Distribution over observed rows for one true input."""
    from .bits import bits_to_index

    i = bits_to_index(as_bit_array(bits, energies.n))
    probs = pattern_probabilities(energies)
    out = np.empty_like(probs)
    idx = np.arange(probs.size, dtype=np.int64)
    out[idx ^ i] = probs
    return out


def cmos_correctness_probability(vdd, sigma: float = 1.0):
    """Correct-read probability of a CMOS bit at supply voltage vdd.

    Gaussian threshold noise of scale sigma makes the read wrong with
    probability 0.5 * erfc(vdd / (2 * sqrt(2) * sigma)); vdd = 0 reads at
    chance (p = 0.5) and large vdd approaches certainty.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    arr = np.asarray(vdd, dtype=np.float64)
    if np.any(arr < 0):
        raise ValueError("vdd must be >= 0")
    p = 1.0 - 0.5 * erfc(arr / (2.0 * np.sqrt(2.0) * sigma))
    return float(p) if arr.ndim == 0 else p


def equivalent_energy(p_correct) -> np.ndarray | float:
    """Energy whose flip probability matches 1 - p_correct (log2 scale)."""
    arr = np.asarray(p_correct, dtype=np.float64)
    if np.any(arr < 0) or np.any(arr > 1):
        raise ValueError("probabilities must lie in [0, 1]")
    with np.errstate(divide="ignore"):
        e = -np.log2(1.0 - arr)
    return float(e) if arr.ndim == 0 else e


def save_energies(energies: EnergyVector, path) -> None:
    Path(path).write_text(json.dumps({"energies": energies.entries.tolist()}, indent=2) + "\n")


def load_energies(path) -> EnergyVector:
    data = json.loads(Path(path).read_text())
    return energy_vector(data["energies"])
