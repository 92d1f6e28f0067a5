"""Seeded Monte Carlo experiments over (tester x instance family) grids.

Each experiment runs both sides at every grid point: the yes side samples
the null distribution (the reference itself, or the close member for the
pair families) and the no side samples the family member.  Records are a
pure function of the config; per-trial seeds are derived from the master
seed so trials could run in any order or in parallel.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

from .dist import Pmf
from .errors import ConstructionError, ParameterError
from .instances import (
    build_cfr,
    equal_instance,
    family_member,
    mult_config,
    multiplicative_instance,
    random_sorted_pair,
    testing_lb_config,
    testing_lb_perturbation,
)
from .moments import find_moment_pair
from .rng import derive_seed
from .tester import YES, permutation_identity_test, plugin_tolerant_test

TESTERS = ("perm-id", "plugin-tol")
FAMILIES = (
    "equal",
    "testing-lb",
    "cfr-c",
    "cfr-f",
    "cfr-pair",
    "mult-close",
    "mult-far",
    "mult-pair",
)

CSV_COLUMNS = [
    "family",
    "tester",
    "n",
    "param1",
    "param2",
    "m",
    "trials",
    "yes_instance_accept_rate",
    "no_instance_reject_rate",
    "ci_low",
    "ci_high",
    "master_seed",
]


@dataclass(frozen=True)
class ExperimentConfig:
    tester: str
    family: str
    n: int
    trials: int
    master_seed: int
    epsilon: float | None = None
    eps_close: float | None = None
    eps_far: float | None = None
    approx_factor: int | None = None  # C of the multiplicative family
    k: int | None = None
    order: int | None = None
    blocks: int | None = None
    sample_grid: tuple[int, ...] | None = None
    bucket_level: bool = False  # multinomial shortcut for perm-id

    def validate(self) -> None:
        if self.tester not in TESTERS:
            raise ParameterError(f"unknown tester {self.tester!r}")
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown family {self.family!r}")
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if self.n < 2:
            raise ParameterError("domain size must be >= 2")
        if self.sample_grid is not None:
            grid = tuple(self.sample_grid)
            if any(b <= a for a, b in zip(grid, grid[1:])) or not grid:
                raise ParameterError("sample_grid must be strictly increasing")
            if any(m < 1 for m in grid):
                raise ParameterError("sample_grid entries must be >= 1")
        if self.tester == "perm-id":
            if self.epsilon is None:
                raise ParameterError("perm-id needs epsilon")
        else:
            if self.eps_close is None or self.eps_far is None:
                raise ParameterError("plugin-tol needs eps_close and eps_far")
        if self.family == "testing-lb" and self.epsilon is None:
            raise ParameterError("testing-lb family needs epsilon (mixing weight)")
        if self.family.startswith("mult") and self.approx_factor is None:
            raise ParameterError("multiplicative family needs C")
        if self.family.startswith("cfr") and self.k is None and self.order is None:
            raise ParameterError("cfr family needs k or order")

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        known = {
            "tester", "family", "n", "trials", "master_seed", "epsilon",
            "eps_close", "eps_far", "C", "k", "order", "blocks",
            "sample_grid", "bucket_level",
        }
        unknown = set(obj) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(
                tester=str(obj["tester"]),
                family=str(obj["family"]),
                n=int(obj["n"]),
                trials=int(obj["trials"]),
                master_seed=int(obj["master_seed"]),
                epsilon=obj.get("epsilon"),
                eps_close=obj.get("eps_close"),
                eps_far=obj.get("eps_far"),
                approx_factor=obj.get("C"),
                k=obj.get("k"),
                order=obj.get("order"),
                blocks=obj.get("blocks"),
                sample_grid=tuple(obj["sample_grid"]) if obj.get("sample_grid") else None,
                bucket_level=bool(obj.get("bucket_level", False)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParameterError(f"bad experiment config: {exc}") from exc


@dataclass(frozen=True)
class TrialRecord:
    grid_index: int
    trial_index: int
    side: str  # "yes" or "no"
    m_used: int
    derived_seed: int
    decision: str
    true_tv: float


@dataclass(frozen=True)
class RateSummary:
    grid_index: int
    m: int
    trials: int
    accept_rate: float  # yes side
    reject_rate: float  # no side
    accept_ci: tuple[float, float]
    reject_ci: tuple[float, float]


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """95% Wilson score interval for a binomial rate."""
    if trials <= 0:
        raise ParameterError("need at least one trial")
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = z * ((phat * (1 - phat) / trials + z2 / (4 * trials**2)) ** 0.5) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def _cfr_base_pair(cfg: ExperimentConfig) -> tuple[Pmf, Pmf]:
    if cfg.order is not None:
        pair = find_moment_pair(k_max=cfg.k or 8, order=cfg.order)
        return pair.p, pair.q
    return random_sorted_pair(cfg.k, derive_seed(cfg.master_seed, 0xBA5E))


def _instance_pair(cfg: ExperimentConfig, inst_seed: int):
    """(reference, yes-side pmf, no-side pmf, yes tv, no tv) for one trial."""
    fam = cfg.family
    if fam == "equal":
        inst = equal_instance(cfg.n)
        return inst.reference, inst.reference, inst.member, 0.0, 0.0
    if fam == "testing-lb":
        lb_cfg = testing_lb_config(cfg.n, cfg.epsilon)
        inst = testing_lb_perturbation(lb_cfg, inst_seed)
        return inst.reference, inst.reference, inst.member, 0.0, inst.true_tv
    if fam.startswith("cfr"):
        p, q = _cfr_base_pair(cfg)
        triple = build_cfr(p, q)
        width = 2 * triple.k * triple.k
        blocks = cfg.blocks or max(1, cfg.n // width)
        if fam == "cfr-pair":
            close = family_member(triple, "C", blocks, derive_seed(inst_seed, 1))
            far = family_member(triple, "F", blocks, derive_seed(inst_seed, 2))
            return close.reference, close.member, far.member, close.true_tv, far.true_tv
        inst = family_member(triple, fam[-1].upper(), blocks, inst_seed)
        return inst.reference, inst.reference, inst.member, 0.0, inst.true_tv
    # multiplicative families
    mc = mult_config(cfg.approx_factor, 1)
    blocks = cfg.blocks or cfg.n // mc.w
    if blocks < 1:
        raise ConstructionError(f"n={cfg.n} smaller than one block (w={mc.w})")
    if fam == "mult-pair":
        close = multiplicative_instance(
            cfg.approx_factor, blocks, "close", derive_seed(inst_seed, 1)
        )
        far = multiplicative_instance(
            cfg.approx_factor, blocks, "far", derive_seed(inst_seed, 2)
        )
        return close.reference, close.member, far.member, close.true_tv, far.true_tv
    which = fam.split("-")[1]
    inst = multiplicative_instance(cfg.approx_factor, blocks, which, inst_seed)
    return inst.reference, inst.reference, inst.member, 0.0, inst.true_tv


def _run_tester(cfg: ExperimentConfig, reference: Pmf, source: Pmf, seed: int, m):
    if cfg.tester == "perm-id":
        return permutation_identity_test(
            reference,
            cfg.epsilon,
            source,
            seed,
            num_samples=m,
            method="bucket-multinomial" if cfg.bucket_level else "draws",
        )
    return plugin_tolerant_test(
        reference, cfg.eps_close, cfg.eps_far, source, seed, num_samples=m
    )


def run_experiment(cfg: ExperimentConfig) -> list[TrialRecord]:
    """All trial outcomes over the sample grid, both sides per trial.

    Fully deterministic given the config; rerunning yields byte-identical
    records.
    """
    cfg.validate()
    grid = cfg.sample_grid if cfg.sample_grid is not None else (None,)
    records: list[TrialRecord] = []
    for gi, m in enumerate(grid):
        for ti in range(cfg.trials):
            inst_seed = derive_seed(cfg.master_seed, gi, ti, 0xA5)
            reference, yes_pmf, no_pmf, yes_tv, no_tv = _instance_pair(cfg, inst_seed)
            for side, src, tv in (("yes", yes_pmf, yes_tv), ("no", no_pmf, no_tv)):
                seed = derive_seed(cfg.master_seed, gi, ti, 1 if side == "yes" else 2)
                verdict = _run_tester(cfg, reference, src, seed, m)
                records.append(
                    TrialRecord(
                        grid_index=gi,
                        trial_index=ti,
                        side=side,
                        m_used=verdict.samples_used,
                        derived_seed=seed,
                        decision=verdict.decision,
                        true_tv=tv,
                    )
                )
    return records


def summarize(records: list[TrialRecord]) -> list[RateSummary]:
    """Accept/reject rates with Wilson intervals, one summary per grid point."""
    if not records:
        raise ParameterError("no records to summarize")
    out = []
    for gi in sorted({r.grid_index for r in records}):
        yes = [r for r in records if r.grid_index == gi and r.side == "yes"]
        no = [r for r in records if r.grid_index == gi and r.side == "no"]
        trials = max(len(yes), len(no))
        accepts = sum(r.decision == YES for r in yes)
        rejects = sum(r.decision != YES for r in no)
        out.append(
            RateSummary(
                grid_index=gi,
                m=(yes or no)[0].m_used,
                trials=trials,
                accept_rate=accepts / len(yes) if yes else float("nan"),
                reject_rate=rejects / len(no) if no else float("nan"),
                accept_ci=wilson_interval(accepts, len(yes)) if yes else (0.0, 1.0),
                reject_ci=wilson_interval(rejects, len(no)) if no else (0.0, 1.0),
            )
        )
    return out


def threshold(summaries: list[RateSummary], max_error: float = 1 / 3) -> int | None:
    """Smallest grid m with both error rates at most max_error, else None."""
    for s in sorted(summaries, key=lambda s: s.m):
        if (1.0 - s.accept_rate) <= max_error and (1.0 - s.reject_rate) <= max_error:
            return s.m
    return None


def write_csv(path, cfg: ExperimentConfig, summaries: list[RateSummary]) -> None:
    """One row per grid point; columns fixed by CSV_COLUMNS.

    param1/param2 are epsilon and the family parameter (C or k) for the
    identity tester, or the two tolerance parameters for the plug-in
    tester.  The Wilson interval shown is the no-side reject rate's,
    except for the `equal` family where it covers the accept rate.
    Written atomically (temp file then rename).
    """
    if cfg.tester == "perm-id":
        param1 = cfg.epsilon
        param2 = cfg.approx_factor if cfg.approx_factor is not None else (cfg.k or "")
    else:
        param1, param2 = cfg.eps_close, cfg.eps_far
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for s in summaries:
            ci = s.accept_ci if cfg.family == "equal" else s.reject_ci
            writer.writerow(
                [
                    cfg.family,
                    cfg.tester,
                    cfg.n,
                    param1,
                    param2,
                    s.m,
                    s.trials,
                    f"{s.accept_rate:.6f}",
                    f"{s.reject_rate:.6f}",
                    f"{ci[0]:.6f}",
                    f"{ci[1]:.6f}",
                    cfg.master_seed,
                ]
            )
    os.replace(tmp, path)


def run_scaling_study(
    domain_sizes: tuple[int, ...],
    epsilon: float,
    grid: tuple[int, ...],
    trials: int,
    master_seed: int,
    out_csv=None,
) -> dict[int, tuple[list[RateSummary], int | None]]:
    """Empirical sample-size thresholds of the identity tester on the
    cascading-swap family, for a range of domain sizes at fixed epsilon.

    Uses the bucket-level multinomial path so the grid can extend far past
    simulate-by-draw budgets.  Returns per-n summaries and the located
    threshold; optionally writes all rate rows to one CSV.
    """
    out = {}
    for n in domain_sizes:
        cfg = ExperimentConfig(
            tester="perm-id",
            family="testing-lb",
            n=n,
            epsilon=epsilon,
            sample_grid=tuple(grid),
            trials=trials,
            master_seed=derive_seed(master_seed, n),
            bucket_level=True,
        )
        summaries = summarize(run_experiment(cfg))
        out[n] = (summaries, threshold(summaries))
    if out_csv is not None:
        tmp = f"{out_csv}.tmp"
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for n, (summaries, _) in out.items():
                for s in summaries:
                    writer.writerow(
                        [
                            "testing-lb", "perm-id", n, epsilon, "", s.m,
                            s.trials, f"{s.accept_rate:.6f}",
                            f"{s.reject_rate:.6f}", f"{s.reject_ci[0]:.6f}",
                            f"{s.reject_ci[1]:.6f}", master_seed,
                        ]
                    )
        os.replace(tmp, out_csv)
    return out
