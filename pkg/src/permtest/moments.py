"""Power-sum-matched distribution pairs and the block birthday simulation.

Two pmfs whose value power sums agree up to order r produce identical
fingerprint statistics for any r samples under uniform relabeling, so a
matched pair with positive distance seeds the repeat-and-alternate family
with blocks that are individually uninformative.  The pair search is an
exhaustive scan over integer multisets in exact arithmetic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dist import Pmf
from .errors import ParameterError, SearchBudgetError
from .rng import generator

VALUE_BOUND = 60
SIZE_BOUND = 8
STAGE_BOUNDS = (12, 18, 24, 36, 48, 60)
ENUM_CAP = 500_000


@dataclass(frozen=True)
class MomentPair:
    """Two distinct pmfs with equal value power sums up to ``order``."""

    k: int
    p: Pmf
    q: Pmf
    order: int
    power_sums: tuple[Fraction, ...]
    values_p: tuple[int, ...]
    values_q: tuple[int, ...]
    total: int


def _signature(values: tuple[int, ...], order: int) -> tuple[int, ...]:
    return tuple(sum(v**j for v in values) for j in range(1, order + 1))


def _best_pair_at(
    bound: int, k: int, order: int
) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
    """Max-TV matched pair among size-k multisets with values <= bound."""
    groups: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
    for values in itertools.combinations_with_replacement(range(bound + 1), k):
        if values[-1] == 0:
            continue  # all-zero multiset carries no mass
        groups.setdefault(_signature(values, order), []).append(values)
    # Compare tv = gap/(2 total) by integer cross-multiplication.
    best: tuple[int, int, tuple[int, ...], tuple[int, ...]] | None = None
    for members in groups.values():
        if len(members) < 2:
            continue
        for a, b in itertools.combinations(members, 2):
            gap = sum(abs(x - y) for x, y in zip(a, b))
            if gap == 0:
                continue
            total = sum(a)
            if (
                best is None
                or gap * best[1] > best[0] * total
                or (gap * best[1] == best[0] * total and (a, b) < best[2:])
            ):
                best = (gap, total, a, b)
    return None if best is None else (best[2], best[3])


def find_moment_pair(k_max: int, order: int) -> MomentPair:
    """Exhaustive search for a power-sum-matched pair of maximal distance.

    Integer multisets of size k with values up to a staged bound are
    grouped by their exact power-sum signature (sum, sum of squares, ...,
    up to ``order``).  Stages run in increasing cost: value bound 12
    first, sizes k = order+1 upward; the first (bound, k) cell containing
    any matched pair wins, and the pair maximizing total variation within
    that cell is returned (ties broken lexicographically).  Raises
    SearchBudgetError when the full budget (values <= 60, k <= 8) holds
    no pair.
    """
    if order < 1:
        raise ParameterError("order must be >= 1")
    if k_max < order + 2:
        raise ParameterError("k_max must be at least order + 2")
    k_max = min(k_max, SIZE_BOUND)

    for bound in STAGE_BOUNDS:
        for k in range(order + 1, k_max + 1):
            if math.comb(bound + k, k) > ENUM_CAP:
                continue
            found = _best_pair_at(bound, k, order)
            if found is None:
                continue
            a, b = found
            total = sum(a)
            return MomentPair(
                k=len(a),
                p=Pmf(np.asarray(a, dtype=np.float64) / total),
                q=Pmf(np.asarray(b, dtype=np.float64) / total),
                order=order,
                power_sums=tuple(
                    Fraction(sig_j, total**j)
                    for j, sig_j in enumerate(_signature(a, order), start=1)
                ),
                values_p=a,
                values_q=b,
                total=total,
            )
    raise SearchBudgetError(
        f"no power-sum-matched pair of order {order} with values <= "
        f"{STAGE_BOUNDS[-1]} and k <= {k_max}"
    )


def birthday_load(
    blocks: int,
    m_samples: int,
    order: int,
    seed: int,
    reps: int,
    weights=None,
) -> float:
    """Empirical probability that some block collects more than `order`
    of m thrown samples.

    Blocks are uniform cells unless per-block weights are given (they are
    normalized).  Below this load threshold, block-local fingerprints of
    matched-moment members are uninformative.
    """
    if blocks < 1:
        raise ParameterError("need at least one block")
    if reps < 1:
        raise ParameterError("need at least one repetition")
    if order < 1:
        raise ParameterError("order must be >= 1")
    if m_samples < 0:
        raise ParameterError("sample count must be >= 0")
    if m_samples <= order:
        return 0.0
    if weights is None:
        pvals = np.full(blocks, 1.0 / blocks)
    else:
        pvals = np.asarray(weights, dtype=np.float64)
        if pvals.size != blocks or np.any(pvals < 0) or pvals.sum() <= 0:
            raise ParameterError("weights must be `blocks` non-negative reals")
        pvals = pvals / pvals.sum()
    rng = generator(seed)
    counts = rng.multinomial(m_samples, pvals, size=reps)
    return float((counts.max(axis=1) > order).mean())
