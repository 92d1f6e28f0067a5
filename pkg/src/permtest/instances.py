"""Hard-instance generators with exact ground-truth metadata.

Three families, each producing a reference distribution together with
permuted members whose total variation distance from the reference is
known by construction:

* the cascading-swap family: a bucketed reference whose perturbations
  preserve every middle bucket mass exactly while the two end buckets
  drift by a fixed amount, diluted toward any target distance by mixing
  with the uniform distribution;
* the repeat-and-alternate family built from a base pair (p, q): block
  distributions c and f that are both relabelings of a piecewise-constant
  reference r, with tv(f, r) >= tv(c, r) + tv(p, q)/k;
* the multiplicative-gap family: a dyadic ladder reference with a close
  member at distance 1/(4C-1) and a far member at distance C/(4C-1),
  both identities in exact rational arithmetic.

Every generator returns a HardInstance carrying the witness permutation
and the exact distance; integrity is re-checked at construction time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dist import (
    Permutation,
    Pmf,
    apply_permutation,
    pmf_from_dict,
    pmf_to_dict,
    tv_distance,
)
from .errors import (
    ConstructionError,
    DimensionError,
    FileFormatError,
    ParameterError,
)
from .rng import derive_seed, generator

INSTANCE_TOL = 1e-12


@dataclass(frozen=True)
class HardInstance:
    """Reference, permuted member, witness, and exact distance metadata."""

    reference: Pmf
    member: Pmf
    witness: Permutation
    true_tv: float
    params: dict

    def check(self, tol: float = INSTANCE_TOL) -> None:
        """Re-derive the member from the witness and the distance from the
        vectors; raise if either disagrees with the stored metadata."""
        relabeled = apply_permutation(self.reference, self.witness)
        gap = float(np.abs(relabeled.probs - self.member.probs).max())
        if gap > tol:
            raise ConstructionError(f"witness does not reproduce member (gap {gap:g})")
        tv = tv_distance(self.reference, self.member)
        if abs(tv - self.true_tv) > tol:
            raise ConstructionError(
                f"metadata tv {self.true_tv!r} != recomputed {tv!r}"
            )

    @property
    def n(self) -> int:
        return self.reference.n


def _match_values(ref_block: np.ndarray, mem_block: np.ndarray) -> np.ndarray:
    """Witness w with mem[i] == ref[w[i]], given equal value multisets."""
    order_ref = np.argsort(ref_block, kind="stable")
    order_mem = np.argsort(mem_block, kind="stable")
    w = np.empty(ref_block.size, dtype=np.int64)
    w[order_mem] = order_ref
    return w


def equal_instance(n: int) -> HardInstance:
    """The trivial instance: member equals the uniform reference."""
    ref = Pmf.uniform(n)
    return HardInstance(
        reference=ref,
        member=ref,
        witness=Permutation.identity(n),
        true_tv=0.0,
        params={"family": "equal", "n": n},
    )


# --- cascading-swap family (bucketed reference, end-mass drift) -----------


@dataclass(frozen=True)
class TestingLBConfig:
    """Shape of the cascading-swap construction for a given domain size.

    num_levels is the largest L with (L 2^L)^2 <= n; bucket ell has
    root * 2^ell elements for ell <= L-2 and the last bucket has
    2 (L-2) root 2^(L-2).  swap_base is the floored size of the smallest
    swapped set; all other swap sizes are derived from it so that every
    middle bucket keeps its reference mass exactly.
    """

    n: int
    num_levels: int
    bucket_sizes: tuple[int, ...]
    used: int
    dev_delta: float
    mix_eps: float
    root: int
    swap_base: int

    @property
    def bucket_starts(self) -> tuple[int, ...]:
        starts = [0]
        for size in self.bucket_sizes:
            starts.append(starts[-1] + size)
        return tuple(starts)

    @property
    def swap_sizes(self) -> tuple[int, ...]:
        """Elements moved from bucket ell down to bucket ell+1, ell = 0..L-2."""
        L = self.num_levels
        first_cascade = 2 * (2 * L - 5) * self.swap_base
        return (self.swap_base,) + tuple(
            first_cascade * 2**i for i in range(L - 2)
        )

    @property
    def mixture_weight(self) -> float:
        w = 9.0 * self.mix_eps
        return 1.0 if w >= 1.0 - 1e-12 else w


def _lb_shape(n: int) -> tuple[int, int, tuple[int, ...]]:
    root = math.isqrt(n)
    if root * root < n:
        root += 1
    L = 1
    while ((L + 1) << (L + 1)) ** 2 <= n:
        L += 1
    if L < 4:
        raise ConstructionError(f"domain size {n} too small: need L >= 4")
    sizes = [root * 2**i for i in range(L - 1)]  # buckets 0 .. L-2
    sizes.append(2 * (L - 2) * sizes[-1])  # bucket L-1
    return root, L, tuple(sizes)


def _lb_base_levels(cfg: TestingLBConfig) -> np.ndarray:
    """Per-element mass of each bucket under the unmixed base distribution."""
    L = cfg.num_levels
    sizes = cfg.bucket_sizes
    levels = np.empty(L, dtype=np.float64)
    levels[0] = 1.0 / (3.0 * sizes[0])
    for ell in range(1, L - 1):
        levels[ell] = 1.0 / (3.0 * (L - 2) * sizes[ell])
    levels[L - 1] = 1.0 / (3.0 * sizes[L - 1])
    return levels


def testing_lb_config(n: int, mix_eps: float) -> TestingLBConfig:
    if not (0 < mix_eps <= 1.0 / 9.0 + 1e-15):
        raise ParameterError("mix_eps must be in (0, 1/9]")
    root, L, sizes = _lb_shape(n)
    used = sum(sizes)
    if not (n / 8 <= used <= n):
        raise ConstructionError(f"bucket sizes sum to {used}, outside [n/8, n]")
    swap_base = (2 * root) // (3 * (2 * L - 5))
    if swap_base < 1:
        raise ConstructionError("domain too small for a non-empty end swap")
    return TestingLBConfig(
        n=n,
        num_levels=L,
        bucket_sizes=sizes,
        used=used,
        dev_delta=1.0 / (9.0 * (L - 2)),
        mix_eps=mix_eps,
        root=root,
        swap_base=swap_base,
    )


def testing_lb_reference(n: int, mix_eps: float) -> tuple[Pmf, TestingLBConfig]:
    """Reference distribution: (1 - 9 eps) uniform + 9 eps base.

    The base is uniform inside each bucket with end buckets carrying mass
    1/3 each and every middle bucket 1/(3(L-2)); elements past the bucketed
    prefix carry zero base mass.  mix_eps = 1/9 selects the unmixed base.
    """
    cfg = testing_lb_config(n, mix_eps)
    levels = _lb_base_levels(cfg)
    base = np.zeros(n, dtype=np.float64)
    starts = cfg.bucket_starts
    for ell in range(cfg.num_levels):
        base[starts[ell] : starts[ell + 1]] = levels[ell]
    w = cfg.mixture_weight
    if w >= 1.0:
        mixed = base
    else:
        mixed = (1.0 - w) / n + w * base
    return Pmf(mixed), cfg


def testing_lb_perturbation(cfg: TestingLBConfig, seed: int) -> HardInstance:
    """One member of the perturbation family, built by cascading swaps.

    Each middle bucket hands a random set of elements down to the next
    bucket and receives one from the previous; the first and last buckets
    trade with their neighbors only.  Swap sizes double level to level,
    which keeps every middle bucket mass exactly equal to the reference.
    Set sizes that the ideal construction would make fractional are
    floored, and the metadata reports the exact resulting distance.
    """
    reference, _ = testing_lb_reference(cfg.n, cfg.mix_eps)
    L = cfg.num_levels
    starts = cfg.bucket_starts
    swaps = cfg.swap_sizes
    rng = generator(seed)

    # receivers[ell] and givers[ell] are disjoint random subsets of bucket ell.
    receivers: dict[int, np.ndarray] = {}
    givers: dict[int, np.ndarray] = {}
    givers[0] = starts[0] + rng.permutation(cfg.bucket_sizes[0])[: swaps[0]]
    for ell in range(1, L - 1):
        shuffled = starts[ell] + rng.permutation(cfg.bucket_sizes[ell])
        r_size, g_size = swaps[ell - 1], swaps[ell]
        receivers[ell] = shuffled[:r_size]
        givers[ell] = shuffled[r_size : r_size + g_size]
    receivers[L - 1] = starts[L - 1] + rng.permutation(cfg.bucket_sizes[L - 1])[
        : swaps[L - 2]
    ]

    perm = np.arange(cfg.n, dtype=np.int64)
    for ell in range(L - 1):
        down, up = givers[ell], receivers[ell + 1]
        perm[down] = up
        perm[up] = down

    witness = Permutation(perm)
    member = apply_permutation(reference, witness)
    inst = HardInstance(
        reference=reference,
        member=member,
        witness=witness,
        true_tv=tv_distance(reference, member),
        params={
            "family": "testing-lb",
            "n": cfg.n,
            "mix_eps": cfg.mix_eps,
            "num_levels": L,
            "swap_base": cfg.swap_base,
            "seed": seed,
        },
    )
    inst.check()
    return inst


def testing_lb_predicted_tv(cfg: TestingLBConfig) -> float:
    """Exact distance of any perturbation, from the construction arithmetic.

    Each of the L-1 swaps moves the same mass excess; with the floored
    smallest swap size s0 the unmixed distance is
    (L-1)(2L-5) s0 / (6 (L-2) root), scaled by the mixture weight.
    """
    L = cfg.num_levels
    base = Fraction((L - 1) * (2 * L - 5) * cfg.swap_base, 6 * (L - 2) * cfg.root)
    return cfg.mixture_weight * float(base)


# --- repeat-and-alternate family (c / f / r blocks) ------------------------


@dataclass(frozen=True)
class CFRTriple:
    """Block distributions over [2k^2] derived from a base pair on [k].

    c repeats the base pair as k copies of p/(2k) then k copies of q/(2k);
    f swaps the two halves; r is constant on each length-k bucket, taking
    the bucket's base value.  c and f are relabelings of r.
    """

    k: int
    base_p: Pmf
    base_q: Pmf
    c: Pmf
    f: Pmf
    r: Pmf


def build_cfr(p: Pmf, q: Pmf) -> CFRTriple:
    """Assemble the c/f/r triple; the base pair is sorted non-decreasing."""
    if p.n != q.n:
        raise DimensionError(f"base pair sizes differ: {p.n} vs {q.n}")
    k = p.n
    if k < 2:
        raise ParameterError("base pair needs k >= 2")
    vals_p = np.sort(p.probs) / (2 * k)
    vals_q = np.sort(q.probs) / (2 * k)
    c = np.concatenate([np.tile(vals_p, k), np.tile(vals_q, k)])
    f = np.concatenate([np.tile(vals_q, k), np.tile(vals_p, k)])
    r = np.concatenate([np.repeat(vals_p, k), np.repeat(vals_q, k)])
    return CFRTriple(
        k=k,
        base_p=Pmf(np.sort(p.probs)),
        base_q=Pmf(np.sort(q.probs)),
        c=Pmf(c),
        f=Pmf(f),
        r=Pmf(r),
    )


def cfr_distances(triple: CFRTriple) -> tuple[float, float, float]:
    """(tv(c, r), tv(f, r), tv(p, q)) for the gap inequality."""
    return (
        tv_distance(triple.c, triple.r),
        tv_distance(triple.f, triple.r),
        tv_distance(triple.base_p, triple.base_q),
    )


def family_member(
    triple: CFRTriple, which: str, blocks: int, seed: int
) -> HardInstance:
    """Concatenate `blocks` independently bucket-shuffled copies of c or f.

    The reference is the matching concatenation of r.  Shuffling within
    the length-k buckets leaves the distance to r unchanged, so the
    member's distance equals tv(c, r) or tv(f, r) exactly.
    """
    which = which.upper()
    if which not in ("C", "F"):
        raise ParameterError("which must be 'C' or 'F'")
    if blocks < 1:
        raise ParameterError("block count must be >= 1")
    k = triple.k
    width = 2 * k * k
    base = (triple.c if which == "C" else triple.f).probs / blocks
    ref_block = triple.r.probs / blocks

    member = np.empty(blocks * width, dtype=np.float64)
    witness = np.empty(blocks * width, dtype=np.int64)
    for b in range(blocks):
        rng = generator(derive_seed(seed, b))
        block = base.copy()
        for bucket in range(2 * k):
            lo, hi = bucket * k, (bucket + 1) * k
            block[lo:hi] = block[lo:hi][rng.permutation(k)]
        off = b * width
        member[off : off + width] = block
        witness[off : off + width] = off + _match_values(ref_block, block)

    reference = Pmf(np.tile(ref_block, blocks))
    member_pmf = Pmf(member)
    inst = HardInstance(
        reference=reference,
        member=member_pmf,
        witness=Permutation(witness),
        true_tv=tv_distance(reference, member_pmf),
        params={
            "family": f"cfr-{which.lower()}",
            "n": blocks * width,
            "k": k,
            "blocks": blocks,
            "seed": seed,
        },
    )
    inst.check()
    return inst


def random_sorted_pair(k: int, seed: int) -> tuple[Pmf, Pmf]:
    """A random base pair for the repeat-and-alternate family."""
    if k < 2:
        raise ParameterError("need k >= 2")
    rng = generator(seed)
    p = Pmf.from_weights(np.sort(rng.random(k) + 1e-3))
    q = Pmf.from_weights(np.sort(rng.random(k) + 1e-3))
    return Pmf(np.sort(p.probs)), Pmf(np.sort(q.probs))


# --- multiplicative-gap family (dyadic ladder) ------------------------------


@dataclass(frozen=True)
class MultiplicativeConfig:
    """Sizes of the dyadic-ladder construction for approximation factor C.

    One block spans w = mval (2^(C+1) + 2^(C-1) - 3) elements split into
    C+1 buckets; every element mass is a power of two over
    s = mval (4C-1) 2^(C-1), where mval = 2^C - 1.
    """

    approx_factor: int
    mval: int
    s: int
    w: int
    bucket_sizes: tuple[int, ...]
    t: int


def mult_config(approx_factor: int, t: int) -> MultiplicativeConfig:
    C = approx_factor
    if C < 2 or C != int(C):
        raise ParameterError("approximation factor must be an integer >= 2")
    if t < 1:
        raise ParameterError("block count must be >= 1")
    mval = 2**C - 1
    w = mval * (2 ** (C + 1) + 2 ** (C - 1) - 3)
    s = mval * (4 * C - 1) * 2 ** (C - 1)
    sizes = (
        (mval,)
        + tuple(mval * 2 ** (i + 1) for i in range(1, C))
        + (mval * 2 ** (C - 1),)
    )
    if sum(sizes) != w:
        raise ConstructionError("bucket sizes do not tile the block")
    return MultiplicativeConfig(
        approx_factor=C, mval=mval, s=s, w=w, bucket_sizes=sizes, t=t
    )


def mult_exponents(approx_factor: int) -> dict[str, np.ndarray]:
    """Per-element exponents e (mass 2^e / s) for one block of each vector.

    Reference ladder: 2^C on the first bucket, 2^(C-i) on middle bucket i,
    1 on the last.  The close member redistributes only inside the first
    and last buckets; the far member shifts every level by one in a
    three-way split of each middle bucket.
    """
    C = approx_factor
    mval = 2**C - 1
    half = 2 ** (C - 1)

    ref = [C] * mval
    close = [0] * half + [C] * (half - 1)
    far = [C - 1] * mval
    for i in range(1, C):
        ref += [C - i] * (mval * 2 ** (i + 1))
        close += [C - i] * (mval * 2 ** (i + 1))
        far += (
            [C - i - 1] * (mval * 2**i)
            + [C - i] * (mval * 2 ** (i - 1))
            + [C - i + 1] * (mval * 2 ** (i - 1))
        )
    ref += [0] * (mval * half)
    close += [0] * ((mval - 1) * half) + [C] * half
    far += [1] * (mval * half)
    return {
        "ref": np.asarray(ref, dtype=np.int64),
        "close": np.asarray(close, dtype=np.int64),
        "far": np.asarray(far, dtype=np.int64),
    }


def mult_exact_tv(approx_factor: int, which: str) -> Fraction:
    C = approx_factor
    return Fraction(1, 4 * C - 1) if which == "close" else Fraction(C, 4 * C - 1)


def multiplicative_instance(
    approx_factor: int, t: int, which: str, seed: int
) -> HardInstance:
    """t-block instance: reference ladder vs close or far member.

    Blocks are independently shuffled within buckets, which leaves the
    distance invariant because the reference is constant on each bucket.
    """
    which = which.lower()
    if which not in ("close", "far"):
        raise ParameterError("which must be 'close' or 'far'")
    cfg = mult_config(approx_factor, t)
    exps = mult_exponents(approx_factor)
    C = cfg.approx_factor
    atom = 2.0 ** np.arange(C + 1, dtype=np.float64) / (cfg.s * cfg.t)

    starts = [0]
    for size in cfg.bucket_sizes:
        starts.append(starts[-1] + size)

    ref_block_exp = exps["ref"]
    mem_base_exp = exps[which]
    n = cfg.t * cfg.w
    member_exp = np.empty(n, dtype=np.int64)
    witness = np.empty(n, dtype=np.int64)
    for b in range(cfg.t):
        rng = generator(derive_seed(seed, b))
        block = mem_base_exp.copy()
        for i in range(C + 1):
            lo, hi = starts[i], starts[i + 1]
            block[lo:hi] = block[lo:hi][rng.permutation(hi - lo)]
        off = b * cfg.w
        member_exp[off : off + cfg.w] = block
        witness[off : off + cfg.w] = off + _match_values(ref_block_exp, block)

    reference = Pmf(atom[np.tile(ref_block_exp, cfg.t)])
    member = Pmf(atom[member_exp])
    exact = mult_exact_tv(C, which)
    inst = HardInstance(
        reference=reference,
        member=member,
        witness=Permutation(witness),
        true_tv=float(exact),
        params={
            "family": f"mult-{which}",
            "n": n,
            "C": C,
            "blocks": cfg.t,
            "w": cfg.w,
            "s": cfg.s,
            "true_tv_exact": f"{exact.numerator}/{exact.denominator}",
            "seed": seed,
        },
    )
    inst.check()
    return inst


# --- exact rational verification -------------------------------------------


def mult_rational_checks(approx_factor: int) -> list[tuple[str, bool, str]]:
    """Zero-tolerance identities of the dyadic-ladder construction.

    Everything is integer arithmetic on the exponent vectors: total mass
    one, equal per-bucket member masses, the two exact distances, the
    per-bucket mass bound 2/(C+1), and multiset equality (so witness
    permutations exist).
    """
    C = approx_factor
    cfg = mult_config(C, 1)
    exps = mult_exponents(C)
    s = cfg.s
    starts = [0]
    for size in cfg.bucket_sizes:
        starts.append(starts[-1] + size)

    def mass(exp: np.ndarray, lo: int, hi: int) -> Fraction:
        return Fraction(int((1 << exp[lo:hi].astype(object)).sum()), s)

    checks: list[tuple[str, bool, str]] = []

    for name in ("ref", "close", "far"):
        total = mass(exps[name], 0, cfg.w)
        checks.append((f"total-mass-{name}", total == 1, f"{total}"))

    for i in range(C + 1):
        lo, hi = starts[i], starts[i + 1]
        mc, mf = mass(exps["close"], lo, hi), mass(exps["far"], lo, hi)
        checks.append(
            (f"bucket-{i}-mass-equal", mc == mf, f"close {mc} vs far {mf}")
        )
        bound = Fraction(2, C + 1)
        checks.append(
            (f"bucket-{i}-mass-bound", mc <= bound, f"{mc} <= {bound}")
        )

    for which, expected in (("close", mult_exact_tv(C, "close")),
                            ("far", mult_exact_tv(C, "far"))):
        diff = np.abs(
            (1 << exps["ref"].astype(object)) - (1 << exps[which].astype(object))
        ).sum()
        tv = Fraction(int(diff), 2 * s)
        checks.append((f"tv-ref-{which}", tv == expected, f"{tv} vs {expected}"))

    for which in ("close", "far"):
        same = np.array_equal(np.sort(exps["ref"]), np.sort(exps[which]))
        checks.append((f"{which}-is-relabeling", same, "sorted exponents equal"))

    return checks


# --- instance serialization -------------------------------------------------


def instance_to_dict(inst: HardInstance) -> dict:
    return {
        "format": "hard-instance",
        "family": inst.params.get("family", "unknown"),
        "n": inst.n,
        "true_tv": float(inst.true_tv),
        "params": inst.params,
        "reference": pmf_to_dict(inst.reference),
        "member": pmf_to_dict(inst.member),
        "witness": [int(x) for x in inst.witness.mapping],
    }


def instance_from_dict(obj: dict) -> HardInstance:
    try:
        inst = HardInstance(
            reference=pmf_from_dict(obj["reference"]),
            member=pmf_from_dict(obj["member"]),
            witness=Permutation(np.asarray(obj["witness"], dtype=np.int64)),
            true_tv=float(obj["true_tv"]),
            params=dict(obj.get("params", {})),
        )
    except (KeyError, TypeError, ParameterError) as exc:
        raise FileFormatError(f"not a hard-instance object: {exc}") from exc
    try:
        inst.check()
    except ConstructionError as exc:
        raise FileFormatError(f"instance fails integrity check: {exc}") from exc
    return inst


def save_instance(inst: HardInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(inst), fh)
        fh.write("\n")


def load_instance(path) -> HardInstance:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FileFormatError(f"cannot read instance from {path}: {exc}") from exc
    return instance_from_dict(obj)
