"""Discrete distributions on [n]: distances, permutations, sampling, learning.

A Pmf is a validated probability vector; a Permutation relabels the domain.
Distances are total variation (half L1) and Kolmogorov (max prefix gap).
Sampling is seeded and reproducible; the empirical estimator together with
``dkw_sample_count`` gives Kolmogorov-distance learning with an explicit
failure probability.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, FileFormatError, ParameterError
from .rng import AliasSampler, generator

PROB_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Pmf:
    """Probability mass function over {0, ..., n-1}.

    Entries must be non-negative and sum to 1 within PROB_SUM_TOL.  The
    constructor never renormalizes; use ``from_weights`` for that.
    """

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 1 or probs.size < 1:
            raise ParameterError("pmf needs a non-empty 1-d probability vector")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise ParameterError("pmf entries must be finite and >= 0")
        if abs(float(probs.sum()) - 1.0) > PROB_SUM_TOL:
            raise ParameterError(
                f"pmf entries sum to {probs.sum()!r}, not 1 within {PROB_SUM_TOL}"
            )
        probs = probs.copy()
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    @property
    def n(self) -> int:
        return self.probs.size

    @classmethod
    def uniform(cls, n: int) -> "Pmf":
        if n < 1:
            raise ParameterError("domain size must be >= 1")
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def from_weights(cls, weights) -> "Pmf":
        """Explicitly renormalize non-negative weights into a Pmf."""
        w = np.asarray(weights, dtype=np.float64)
        total = w.sum()
        if not np.isfinite(total) or total <= 0:
            raise ParameterError("weights must have a positive finite sum")
        return cls(w / total)

    def __eq__(self, other) -> bool:
        return isinstance(other, Pmf) and np.array_equal(self.probs, other.probs)


@dataclass(frozen=True)
class Permutation:
    """A bijection on {0, ..., n-1}, stored as the image array."""

    mapping: np.ndarray

    def __post_init__(self):
        mapping = np.asarray(self.mapping, dtype=np.int64)
        if mapping.ndim != 1 or mapping.size < 1:
            raise ParameterError("permutation needs a non-empty 1-d index vector")
        n = mapping.size
        seen = np.zeros(n, dtype=bool)
        if mapping.min() < 0 or mapping.max() >= n:
            raise ParameterError("permutation entries must lie in [0, n)")
        seen[mapping] = True
        if not seen.all():
            raise ParameterError("mapping is not a bijection on [0, n)")
        mapping = mapping.copy()
        mapping.flags.writeable = False
        object.__setattr__(self, "mapping", mapping)

    @property
    def n(self) -> int:
        return self.mapping.size

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n, dtype=np.int64))

    @classmethod
    def random(cls, n: int, seed: int) -> "Permutation":
        return cls(generator(seed).permutation(n))


@dataclass(frozen=True)
class SampleSet:
    """i.i.d. draws from some pmf, tagged with the seed that produced them."""

    draws: np.ndarray
    seed: int

    def __post_init__(self):
        draws = np.asarray(self.draws, dtype=np.int64)
        object.__setattr__(self, "draws", draws)

    @property
    def m(self) -> int:
        return self.draws.size


def _check_same_length(p: Pmf, q: Pmf) -> None:
    if p.n != q.n:
        raise DimensionError(f"domain sizes differ: {p.n} vs {q.n}")


def tv_distance(p: Pmf, q: Pmf) -> float:
    """Total variation distance, the half-L1 gap between the mass functions."""
    _check_same_length(p, q)
    return 0.5 * float(np.abs(p.probs - q.probs).sum())


def kolmogorov_distance(p: Pmf, q: Pmf) -> float:
    """Max absolute gap between the two CDFs over the ordered domain."""
    _check_same_length(p, q)
    return float(np.abs(np.cumsum(p.probs - q.probs)).max())


def apply_permutation(q: Pmf, pi: Permutation) -> Pmf:
    """Relabel: result(i) = q(pi(i)).  Preserves the multiset of masses."""
    if q.n != pi.n:
        raise DimensionError(f"domain sizes differ: {q.n} vs {pi.n}")
    return Pmf(q.probs[pi.mapping])


def sample(p: Pmf, m: int, seed: int) -> SampleSet:
    """Draw m i.i.d. indices from p, deterministically for a given seed.

    Uses an alias table, so the per-draw cost is O(1) after O(n) setup.
    """
    if m < 0:
        raise ParameterError("sample count must be >= 0")
    draws = AliasSampler(p.probs).draw(m, seed)
    return SampleSet(draws=draws, seed=seed)


def empirical_pmf(s: SampleSet, n: int) -> Pmf:
    """Frequency vector of the draws over a domain of size n."""
    if s.m == 0:
        raise ParameterError("cannot form an empirical pmf from zero samples")
    if s.draws.min() < 0 or s.draws.max() >= n:
        raise DimensionError("draws contain an index outside [0, n)")
    return Pmf(np.bincount(s.draws, minlength=n) / s.m)


def dkw_sample_count(delta: float, beta: float) -> int:
    """Samples for the empirical CDF to land within Kolmogorov distance delta
    except with probability beta: ceil(ln(2/beta) / (2 delta^2)).

    Uses the tight tail constant 2 in Pr[K > delta] <= 2 exp(-2 m delta^2).
    """
    if not (0 < delta <= 1):
        raise ParameterError("delta must be in (0, 1]")
    if not (0 < beta < 1):
        raise ParameterError("beta must be in (0, 1)")
    return math.ceil(math.log(2.0 / beta) / (2.0 * delta * delta))


# --- file formats ---------------------------------------------------------


def pmf_to_dict(p: Pmf) -> dict:
    return {"n": p.n, "probs": [float(x) for x in p.probs]}


def pmf_from_dict(obj) -> Pmf:
    try:
        n = int(obj["n"])
        probs = obj["probs"]
    except (TypeError, KeyError) as exc:
        raise FileFormatError(f"not a pmf object: missing {exc}") from exc
    if not isinstance(probs, list) or len(probs) != n:
        raise FileFormatError("pmf 'probs' must be a list of length 'n'")
    try:
        return Pmf(np.asarray(probs, dtype=np.float64))
    except ParameterError as exc:
        raise FileFormatError(f"invalid pmf: {exc}") from exc


def save_pmf(p: Pmf, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(pmf_to_dict(p), fh)
        fh.write("\n")


def load_pmf(path) -> Pmf:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FileFormatError(f"cannot read pmf from {path}: {exc}") from exc
    return pmf_from_dict(obj)


def save_samples(s: SampleSet, path) -> None:
    """Newline-separated 0-based integers, ASCII."""
    with open(path, "w", encoding="ascii") as fh:
        fh.writelines(f"{int(d)}\n" for d in s.draws)


def load_samples(path) -> SampleSet:
    try:
        with open(path, encoding="ascii") as fh:
            draws = [int(line) for line in fh if line.strip()]
    except (OSError, ValueError) as exc:
        raise FileFormatError(f"cannot read samples from {path}: {exc}") from exc
    return SampleSet(draws=np.asarray(draws, dtype=np.int64), seed=0)
