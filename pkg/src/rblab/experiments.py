"""KL-Gap sweeps over component counts and the risk-decomposition check.

The KL Gap of one generation round is
    KL(pi_anchor || G) - KL(pi_gen || G),
where pi_anchor and pi_gen are mixtures fitted to the anchor and synthetic
sets and G is the ground truth.  A positive gap means the synthetic-trained
fit sits closer to the target.  Sweeps vary one of the component counts
(K, J, L) and aggregate the gap over independently seeded rounds.

verify_tv_risk_bound checks, on exactly computable finite discrete
problems, that the true-task risk gap of a fixed predictor is bounded by
C * (TV(task, model) + TV(model, synthetic)) plus the synthetic-side
empirical risk gap.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, replace

import numpy as np

from .em import FitConfig, FittedGmm, fit_gmm
from .estimators import mc_kl
from .generation import (GenerationConfig, build_gt_gmm, build_model_m,
                         sample_anchor, sample_synthetic)
from .gmm import DatasetMatrix, Gmm
from .seeding import (TAG_EVAL_ANCHOR, TAG_EVAL_GEN, TAG_FIT_ANCHOR,
                      TAG_FIT_GEN, TAG_SWEEP, derive_seed)

SWEEP_VARIABLES = ("K", "J", "L")
_VARIABLE_FIELD = {"K": "k_anchor", "J": "j_unsampled", "L": "l_irrelevant"}
_VARIABLE_TAG = {"K": 1, "J": 2, "L": 3}


@dataclass(frozen=True)
class SweepSpec:
    """One swept variable, its values, and the per-round budgets."""

    variable: str
    values: tuple[int, ...]
    rounds: int
    resamples_per_round: int
    base_config: GenerationConfig
    fit_config: FitConfig

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ValueError(f"variable must be one of {SWEEP_VARIABLES}")
        values = tuple(int(v) for v in self.values)
        if not values:
            raise ValueError("values must be nonempty")
        minimum = 1 if self.variable == "K" else 0
        if any(v < minimum for v in values):
            raise ValueError(f"{self.variable} values must be >= {minimum}")
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")
        if self.resamples_per_round < 1:
            raise ValueError("resamples_per_round must be at least 1")
        object.__setattr__(self, "values", values)


def default_sweep_spec(variable: str,
                       base_config: GenerationConfig | None = None,
                       fit_config: FitConfig | None = None,
                       values=range(2, 16),
                       rounds: int = 100,
                       resamples_per_round: int = 100) -> SweepSpec:
    base = base_config if base_config is not None else GenerationConfig()
    fit = fit_config if fit_config is not None else FitConfig(n_components=1)
    return SweepSpec(variable=variable, values=tuple(values), rounds=rounds,
                     resamples_per_round=resamples_per_round,
                     base_config=base, fit_config=fit)


@dataclass(frozen=True)
class SweepRound:
    """One (value, round) cell: both KL terms, their gap, and its seed."""

    value: int
    round_index: int
    kl_anchor: float
    kl_gen: float
    kl_gap: float
    seed: int


@dataclass(frozen=True)
class SweepResult:
    variable: str
    values: tuple[int, ...]
    rounds: tuple[SweepRound, ...]       # ordered by (value, round_index)
    mean_gap: tuple[float, ...]          # per value
    std_gap: tuple[float, ...]           # per value, population std
    n_rounds: int

    def rounds_for(self, value: int) -> list[SweepRound]:
        return [r for r in self.rounds if r.value == value]


def run_kl_gap_round(config: GenerationConfig, fit_config: FitConfig,
                     resamples: int, eval_samples: int,
                     round_seed: int) -> tuple[float, float]:
    """One generation round: build, sample, fit both sets with K+J+L
    components, and Monte-Carlo both KL terms averaged over `resamples`
    independent evaluation draws of `eval_samples` points each."""
    cfg = replace(config, master_seed=round_seed)
    gt = build_gt_gmm(cfg)
    model_m = build_model_m(gt, cfg)
    anchor = sample_anchor(gt, cfg)
    synthetic = sample_synthetic(model_m, cfg)
    n_comp = cfg.k_anchor + cfg.j_unsampled + cfg.l_irrelevant
    fit_anchor = fit_gmm(anchor, replace(
        fit_config, n_components=n_comp, seed=derive_seed(round_seed, TAG_FIT_ANCHOR)))
    fit_gen = fit_gmm(synthetic, replace(
        fit_config, n_components=n_comp, seed=derive_seed(round_seed, TAG_FIT_GEN)))
    kl_anchor = np.mean([
        mc_kl(fit_anchor.model, gt, eval_samples,
              derive_seed(round_seed, TAG_EVAL_ANCHOR, s)).value
        for s in range(resamples)])
    kl_gen = np.mean([
        mc_kl(fit_gen.model, gt, eval_samples,
              derive_seed(round_seed, TAG_EVAL_GEN, s)).value
        for s in range(resamples)])
    return float(kl_anchor), float(kl_gen)


def run_kl_gap_sweep(spec: SweepSpec, threads: int = 1,
                     progress=None) -> SweepResult:
    """Run the sweep; reproducible bit-exactly for any thread count.

    Round seeds derive from (master seed, variable, value, round), rounds
    are independent tasks, and aggregation reads them back in (value,
    round) order, so the schedule never affects the numbers.  `progress`,
    if given, is called with each finished SweepRound.
    """
    master = spec.base_config.master_seed
    var_tag = _VARIABLE_TAG[spec.variable]
    field = _VARIABLE_FIELD[spec.variable]
    eval_samples = spec.base_config.n_resample

    tasks = []
    for vi, value in enumerate(spec.values):
        for r in range(spec.rounds):
            seed = derive_seed(master, TAG_SWEEP, var_tag, value, r)
            tasks.append((vi, value, r, seed))

    def run_task(task):
        vi, value, r, seed = task
        cfg = replace(spec.base_config, **{field: value})
        kl_anchor, kl_gen = run_kl_gap_round(
            cfg, spec.fit_config, spec.resamples_per_round, eval_samples, seed)
        return vi, SweepRound(value=value, round_index=r, kl_anchor=kl_anchor,
                              kl_gen=kl_gen, kl_gap=kl_anchor - kl_gen, seed=seed)

    cells: dict[tuple[int, int], SweepRound] = {}
    if threads <= 1:
        for task in tasks:
            vi, cell = run_task(task)
            cells[(vi, cell.round_index)] = cell
            if progress is not None:
                progress(cell)
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            for vi, cell in pool.map(run_task, tasks):
                cells[(vi, cell.round_index)] = cell
                if progress is not None:
                    progress(cell)

    ordered = [cells[(vi, r)]
               for vi in range(len(spec.values)) for r in range(spec.rounds)]
    mean_gap, std_gap = [], []
    for vi in range(len(spec.values)):
        gaps = np.array([cells[(vi, r)].kl_gap for r in range(spec.rounds)])
        mean_gap.append(float(gaps.mean()))
        std_gap.append(float(gaps.std(ddof=0)))
    return SweepResult(variable=spec.variable, values=spec.values,
                       rounds=tuple(ordered), mean_gap=tuple(mean_gap),
                       std_gap=tuple(std_gap), n_rounds=spec.rounds)


RAW_SWEEP_HEADER = "variable,value,round,kl_anchor,kl_gen,kl_gap,seed"
AGGREGATE_SWEEP_HEADER = "variable,value,mean_gap,std_gap,n_rounds"


def sweep_raw_csv(result: SweepResult) -> str:
    lines = [RAW_SWEEP_HEADER]
    for cell in result.rounds:
        lines.append(",".join([
            result.variable, str(cell.value), str(cell.round_index),
            repr(cell.kl_anchor), repr(cell.kl_gen), repr(cell.kl_gap),
            str(cell.seed)]))
    return "\n".join(lines) + "\n"


def sweep_aggregate_csv(result: SweepResult) -> str:
    lines = [AGGREGATE_SWEEP_HEADER]
    for value, mean, std in zip(result.values, result.mean_gap, result.std_gap):
        lines.append(",".join([result.variable, str(value), repr(mean),
                               repr(std), str(result.n_rounds)]))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Exact finite-support check of the TV risk decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RiskBoundTrial:
    holds: bool
    slack: float          # bound minus observed risk gap, >= 0 when it holds
    lhs: float
    rhs: float


@dataclass(frozen=True)
class RiskBoundReport:
    n_trials: int
    n_violations: int
    min_slack: float
    mean_slack: float
    max_slack: float
    seed: int
    trials: tuple[RiskBoundTrial, ...]

    @property
    def all_hold(self) -> bool:
        return self.n_violations == 0


def verify_tv_risk_bound(trial_count: int, seed: int, max_atoms: int = 20,
                         loss_bound: float = 1.0,
                         keep_trials: bool = False) -> RiskBoundReport:
    """Randomized exact check that for a loss table in [0, C],

        |R_task(f) - R_hat_synthetic(f)|
            <= C * (TV(task, model) + TV(model, synthetic))
               + |R_synthetic(f) - R_hat_synthetic(f)|.

    Distributions are random finite-support laws on a shared set of at most
    `max_atoms` atoms; every term is computed by direct summation, so a
    violation beyond float rounding signals an implementation bug.
    """
    if trial_count < 1:
        raise ValueError("trial_count must be at least 1")
    rng = np.random.default_rng(int(seed) & ((1 << 64) - 1))
    trials = []
    violations = 0
    slacks = np.empty(trial_count)
    for t in range(trial_count):
        n_atoms = int(rng.integers(2, max_atoms + 1))
        dist_task = rng.dirichlet(np.ones(n_atoms))
        dist_model = rng.dirichlet(np.ones(n_atoms))
        dist_gen = rng.dirichlet(np.ones(n_atoms))
        loss = rng.uniform(0.0, loss_bound, size=n_atoms)
        sample_size = int(rng.integers(1, 201))
        sample = rng.choice(n_atoms, size=sample_size, p=dist_gen)

        risk_task = float(dist_task @ loss)
        risk_gen = float(dist_gen @ loss)
        risk_hat = float(loss[sample].mean())
        tv_task = 0.5 * float(np.abs(dist_task - dist_model).sum())
        tv_gen = 0.5 * float(np.abs(dist_model - dist_gen).sum())

        lhs = abs(risk_task - risk_hat)
        rhs = loss_bound * (tv_task + tv_gen) + abs(risk_gen - risk_hat)
        slack = rhs - lhs
        holds = slack >= -1e-12  # exact inequality up to float rounding
        if not holds:
            violations += 1
        slacks[t] = slack
        if keep_trials:
            trials.append(RiskBoundTrial(holds=holds, slack=slack,
                                         lhs=lhs, rhs=rhs))
    return RiskBoundReport(n_trials=trial_count, n_violations=violations,
                           min_slack=float(slacks.min()),
                           mean_slack=float(slacks.mean()),
                           max_slack=float(slacks.max()),
                           seed=int(seed), trials=tuple(trials))


# ---------------------------------------------------------------------------
# One full generation-and-fit run (shared by the CLI and the bound ledger)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GenerationRun:
    config: GenerationConfig
    gt: Gmm
    model_m: Gmm
    anchor: DatasetMatrix
    synthetic: DatasetMatrix
    fit_anchor: FittedGmm | None = None
    fit_gen: FittedGmm | None = None


def run_generation(config: GenerationConfig,
                   fit_config: FitConfig | None = None) -> GenerationRun:
    """Build ground truth and model, draw both datasets, optionally fit
    both with K+J+L components."""
    gt = build_gt_gmm(config)
    model_m = build_model_m(gt, config)
    anchor = sample_anchor(gt, config)
    synthetic = sample_synthetic(model_m, config)
    fit_anchor = fit_gen = None
    if fit_config is not None:
        n_comp = config.k_anchor + config.j_unsampled + config.l_irrelevant
        fit_anchor = fit_gmm(anchor, replace(
            fit_config, n_components=n_comp,
            seed=derive_seed(config.master_seed, TAG_FIT_ANCHOR)))
        fit_gen = fit_gmm(synthetic, replace(
            fit_config, n_components=n_comp,
            seed=derive_seed(config.master_seed, TAG_FIT_GEN)))
    return GenerationRun(config=config, gt=gt, model_m=model_m, anchor=anchor,
                         synthetic=synthetic, fit_anchor=fit_anchor,
                         fit_gen=fit_gen)
