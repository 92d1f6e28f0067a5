"""Testers: identity under a permutation promise, and a plug-in tolerant test.

The identity tester partitions the domain into geometric probability bands
under the reference, learns the induced bucket histogram of the unknown
distribution to a Kolmogorov tolerance, and rejects when the tail bucket is
too heavy or some suffix of bucket masses drifts from the reference.

The tolerant tester is a plug-in: learn the whole distribution empirically
and threshold the measured total variation distance halfway between the
two tolerance parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dist import Pmf, _check_same_length
from .errors import DimensionError, ParameterError
from .rng import AliasSampler, generator

YES = "YES"
NO = "NO"

LEARNER_BETA = 0.1  # failure probability of the bucket-histogram learner

_CHUNK = 1 << 22


def _band_count(n: int, epsilon: float) -> int:
    """Number of geometric bands: 1 + ceil(log(4n/eps) / log(1 + eps/4))."""
    return 1 + math.ceil(math.log(4.0 * n / epsilon) / math.log1p(epsilon / 4.0))


def _check_epsilon(epsilon: float) -> None:
    if not (0 < epsilon <= 1):
        raise ParameterError("epsilon must be in (0, 1]")


@dataclass(frozen=True)
class TesterParams:
    """Derived constants of the identity tester for a given (n, epsilon)."""

    epsilon: float
    num_buckets: int      # L
    alg_delta: float      # epsilon / (4 (L - 1))
    learner_samples: int
    learner_beta: float = LEARNER_BETA


def compute_params(n: int, epsilon: float) -> TesterParams:
    """Bucket count, suffix tolerance and learner budget for the tester."""
    if n < 2:
        raise ParameterError("domain size must be >= 2")
    _check_epsilon(epsilon)
    num_buckets = _band_count(n, epsilon)
    alg_delta = epsilon / (4.0 * (num_buckets - 1))
    learner_samples = math.ceil(
        math.log(2.0 / LEARNER_BETA) / (2.0 * (alg_delta / 3.0) ** 2)
    )
    return TesterParams(
        epsilon=epsilon,
        num_buckets=num_buckets,
        alg_delta=alg_delta,
        learner_samples=learner_samples,
    )


@dataclass(frozen=True)
class BucketPartition:
    """Geometric bucketing of the domain under a reference distribution.

    assignment[i] is the 1-based bucket index of element i.  Bucket ell,
    for ell < L, holds masses in ((1+eps/4)^-ell, (1+eps/4)^-(ell-1)];
    bucket L collects everything at or below the last threshold, zero
    masses included.  ref_bucket_mass has length L+1 with entry ell the
    reference mass of bucket ell (entry 0 unused).
    """

    epsilon: float
    num_buckets: int
    assignment: np.ndarray
    ref_bucket_mass: np.ndarray

    def __post_init__(self):
        for name in ("assignment", "ref_bucket_mass"):
            arr = getattr(self, name)
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def build_buckets(q: Pmf, epsilon: float) -> BucketPartition:
    _check_epsilon(epsilon)
    num_buckets = _band_count(q.n, epsilon)
    ratio = 1.0 + epsilon / 4.0
    log_ratio = math.log1p(epsilon / 4.0)
    probs = q.probs
    pos = probs > 0

    ell = np.full(q.n, num_buckets, dtype=np.int64)
    with np.errstate(divide="ignore"):
        raw = np.ceil(-np.log(probs[pos]) / log_ratio).astype(np.int64)
    raw = np.maximum(raw, 1)
    # Fix floating point at band boundaries: enforce the strict lower and
    # weak upper band inequalities directly.
    for _ in range(2):
        too_low = probs[pos] <= ratio ** (-raw.astype(np.float64))
        raw[too_low] += 1
        too_high = probs[pos] > ratio ** (-(raw.astype(np.float64) - 1.0))
        raw[too_high] -= 1
        if not (too_low.any() or too_high.any()):
            break
    ell[pos] = np.minimum(raw, num_buckets)

    mass = np.bincount(ell, weights=probs, minlength=num_buckets + 1)
    return BucketPartition(
        epsilon=epsilon,
        num_buckets=num_buckets,
        assignment=ell,
        ref_bucket_mass=mass,
    )


def _suffix_sums(bucket_mass: np.ndarray) -> np.ndarray:
    """suffix[j] = sum of buckets j..L-1 for j = 1..L-1 (tail excluded).

    Returned array has length L-1 and is indexed by j-1.
    """
    middle = bucket_mass[1:-1]
    return middle[::-1].cumsum()[::-1]


def exact_suffix_gap(p: Pmf, q: Pmf, bp: BucketPartition) -> tuple[float, int]:
    """Max over cut points of |p(suffix of buckets) - q(suffix)|, no sampling.

    Suffixes run over bucket indices ell..L-1; the tail bucket L is excluded.
    Returns (max deviation, 1-based argmax bucket index).
    """
    _check_same_length(p, q)
    if p.n != bp.assignment.size:
        raise DimensionError("partition was built for a different domain size")
    p_mass = np.bincount(bp.assignment, weights=p.probs, minlength=bp.num_buckets + 1)
    devs = np.abs(_suffix_sums(p_mass) - _suffix_sums(bp.ref_bucket_mass))
    if devs.size == 0:
        return 0.0, 0
    arg = int(devs.argmax())
    return float(devs[arg]), arg + 1


@dataclass(frozen=True)
class Verdict:
    """Tester outcome plus the statistics the decision was based on."""

    decision: str
    tail_mass_hat: float
    max_suffix_dev: float
    argmax_suffix: int
    samples_used: int
    tv_estimate: float = math.nan

    @property
    def accepted(self) -> bool:
        return self.decision == YES


def decide_from_bucket_counts(
    bp: BucketPartition, params: TesterParams, counts: np.ndarray
) -> Verdict:
    """Apply the rejection rule to a learned bucket histogram.

    counts has length L+1, entry ell the number of samples in bucket ell.
    Rejects when the empirical tail mass exceeds 3 eps/8 or some suffix of
    bucket masses deviates from the reference by more than alg_delta / 3.
    """
    m = int(counts.sum())
    if m <= 0:
        raise ParameterError("need at least one sample to decide")
    phat = counts / m
    tail = float(phat[-1])
    devs = np.abs(_suffix_sums(phat) - _suffix_sums(bp.ref_bucket_mass))
    arg = int(devs.argmax()) if devs.size else 0
    max_dev = float(devs[arg]) if devs.size else 0.0
    reject = tail > 3.0 * params.epsilon / 8.0 or max_dev > params.alg_delta / 3.0
    return Verdict(
        decision=NO if reject else YES,
        tail_mass_hat=tail,
        max_suffix_dev=max_dev,
        argmax_suffix=arg + 1 if devs.size else 0,
        samples_used=m,
    )


def _member_pmf(source) -> Pmf:
    if isinstance(source, Pmf):
        return source
    raise ParameterError("source must be a Pmf to sample from")


def bucket_counts_from_draws(bp: BucketPartition, draws: np.ndarray) -> np.ndarray:
    draws = np.asarray(draws, dtype=np.int64)
    if draws.size and (draws.min() < 0 or draws.max() >= bp.assignment.size):
        raise DimensionError("draws contain an index outside [0, n)")
    return np.bincount(bp.assignment[draws], minlength=bp.num_buckets + 1)


def permutation_identity_test(
    q: Pmf,
    epsilon: float,
    source,
    seed: int,
    num_samples: int | None = None,
    method: str = "draws",
) -> Verdict:
    """Test p = q against TV(p, q) > epsilon, given that p is q relabeled.

    Draws the learner budget from ``source`` (a Pmf standing in for sample
    access to the unknown distribution), reduces the draws to bucket counts
    and applies the decision rule.  With ``method="bucket-multinomial"``
    the bucket counts are drawn directly as one multinomial, which has the
    identical distribution since the verdict depends on the sample only
    through those counts; use it when the budget is too large to simulate
    draw by draw.

    Either way the verdict is a deterministic function of (q, epsilon,
    source, seed, num_samples).
    """
    p = _member_pmf(source)
    if p.n != q.n:
        raise DimensionError(f"domain sizes differ: {p.n} vs {q.n}")
    params = compute_params(q.n, epsilon)
    bp = build_buckets(q, epsilon)
    m = params.learner_samples if num_samples is None else int(num_samples)
    if m < 1:
        raise ParameterError("sample budget must be >= 1")
    if method == "draws":
        counts = AliasSampler(p.probs).draw_folded_counts(
            m, seed, fold=bp.assignment, num_bins=bp.num_buckets + 1, chunk=_CHUNK
        )
    elif method == "bucket-multinomial":
        mass = np.bincount(bp.assignment, weights=p.probs, minlength=bp.num_buckets + 1)
        counts = generator(seed).multinomial(m, mass / mass.sum())
    else:
        raise ParameterError(f"unknown sampling method: {method!r}")
    return decide_from_bucket_counts(bp, params, counts)


def identity_test_from_draws(q: Pmf, epsilon: float, draws: np.ndarray) -> Verdict:
    """Run the identity tester on pre-drawn samples (e.g. from a file)."""
    params = compute_params(q.n, epsilon)
    bp = build_buckets(q, epsilon)
    counts = bucket_counts_from_draws(bp, draws)
    return decide_from_bucket_counts(bp, params, counts)


def plugin_sample_count(n: int, eps_close: float, eps_far: float) -> int:
    return math.ceil(8.0 * n / (eps_far - eps_close) ** 2)


def _check_tolerances(eps_close: float, eps_far: float) -> None:
    if not (0 <= eps_close < eps_far <= 1):
        raise ParameterError("need 0 <= eps_close < eps_far <= 1")


def plugin_tolerant_test(
    q: Pmf,
    eps_close: float,
    eps_far: float,
    source,
    seed: int,
    num_samples: int | None = None,
) -> Verdict:
    """Distinguish TV <= eps_close from TV > eps_far via the plug-in estimate.

    Learns the unknown distribution empirically with ceil(8 n / gap^2)
    samples and accepts iff the measured distance to q is at most the
    midpoint of the two tolerances.
    """
    _check_tolerances(eps_close, eps_far)
    p = _member_pmf(source)
    if p.n != q.n:
        raise DimensionError(f"domain sizes differ: {p.n} vs {q.n}")
    m = plugin_sample_count(q.n, eps_close, eps_far) if num_samples is None else int(num_samples)
    if m < 1:
        raise ParameterError("sample budget must be >= 1")
    counts = AliasSampler(p.probs).draw_folded_counts(m, seed, chunk=_CHUNK)
    est = 0.5 * float(np.abs(counts / m - q.probs).sum())
    accept = est <= (eps_close + eps_far) / 2.0
    return Verdict(
        decision=YES if accept else NO,
        tail_mass_hat=math.nan,
        max_suffix_dev=math.nan,
        argmax_suffix=0,
        samples_used=m,
        tv_estimate=est,
    )


def estimate_tv_from_draws(q: Pmf, draws: np.ndarray) -> float:
    """Plug-in TV estimate from pre-drawn samples."""
    draws = np.asarray(draws, dtype=np.int64)
    if draws.size == 0:
        raise ParameterError("need at least one sample")
    if draws.min() < 0 or draws.max() >= q.n:
        raise DimensionError("draws contain an index outside [0, n)")
    counts = np.bincount(draws, minlength=q.n)
    return 0.5 * float(np.abs(counts / draws.size - q.probs).sum())
