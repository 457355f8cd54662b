"""Generalization-bound calculators and the measured/symbolic ledger.

The calculators evaluate the right-hand sides of the information-theoretic
generalization bounds as exact arithmetic over user-supplied quantities
(information gain, compression bottleneck, conditional entropies, ...);
nothing here estimates those quantities from trained networks.  The ledger
pairs the symbolic bound values with measured proxies (entropies, KL gap,
HSIC, TV distances) from one simulated generation run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .em import FittedGmm
from .estimators import delta_h, hsic, mc_entropy, mc_kl, tv_distance
from .generation import convolve_noise
from .gmm import DatasetMatrix, Gmm
from .seeding import TAG_LEDGER, derive_seed


@dataclass(frozen=True)
class BoundParams:
    """User-supplied symbolic inputs to the bound calculators (all nats).

    delta_i: information gain contributed by the generative model.
    b_syn: compression bottleneck, MI between synthetic factors and weights.
    h_e_m: entropy of the model-side synthetic factor.
    delta_eps_p: curation/prompting efficiency slack.
    sigma: sub-Gaussian parameter of the loss.
    eta: per-layer contraction coefficient, in (0, 1).
    depth: hidden-layer count of the trained network.
    n_samples / m_samples: synthetic and anchor training-set sizes.
    loss_bound: uniform bound C on the loss.
    alpha: ratio between the two anchor conditional entropies.
    eps_w_p: training-compression term H(anchor|W) - H(anchor|model output).
    lambda_eff: prompting-efficiency factor, >= 1.
    h_*: entropies and conditional entropies of the two datasets.
    mi_anchor_w: MI between the anchor set and anchor-trained weights.
    tv_task / tv_gen: the two total-variation divergences, in [0, 1].
    """

    delta_i: float = 0.0
    b_syn: float = 0.0
    h_e_m: float = 0.0
    delta_eps_p: float = 0.0
    sigma: float = 1.0
    eta: float = 0.5
    depth: int = 1
    n_samples: int = 1
    m_samples: int = 1
    loss_bound: float = 1.0
    alpha: float = 0.0
    eps_w_p: float = 0.0
    lambda_eff: float = 1.0
    h_anchor_given_w: float = 0.0
    h_gen_given_w: float = 0.0
    h_anchor: float = 0.0
    h_gen: float = 0.0
    mi_anchor_w: float = 0.0
    tv_task: float = 0.0
    tv_gen: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie strictly inside (0, 1)")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.lambda_eff < 1.0:
            raise ValueError("lambda_eff must be at least 1")
        if self.depth < 1 or self.n_samples < 1 or self.m_samples < 1:
            raise ValueError("depth, n_samples and m_samples must be >= 1")
        for name in ("tv_task", "tv_gen"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.loss_bound < 0:
            raise ValueError("loss_bound must be nonnegative")

    @property
    def delta_h(self) -> float:
        """Entropy drop from anchor to synthetic data."""
        return self.h_anchor - self.h_gen


def contraction_factor(eta: float, depth: int) -> float:
    """Depth-wise contraction exp(-(depth/2) * ln(1/eta))."""
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie strictly inside (0, 1)")
    if depth < 1:
        raise ValueError("depth must be at least 1")
    return math.exp(-0.5 * depth * math.log(1.0 / eta))


def gen_error_bound(mi: float, n: int, sigma: float, eta: float,
                    depth: int) -> float:
    """Expected generalization error bound for an n-sample training set:
    contraction_factor * sqrt(2 sigma^2 mi / n), mi being the mutual
    information between the training set and the learned weights."""
    if mi < 0:
        raise ValueError("mutual information must be nonnegative")
    if n < 1:
        raise ValueError("n must be at least 1")
    return contraction_factor(eta, depth) * math.sqrt(2.0 * sigma ** 2 * mi / n)


def synthetic_mi_bound(params: BoundParams) -> float:
    """Upper bound on the MI between the synthetic set and the weights:
    -delta_i + b_syn + h_e_m + delta_eps_p (may be negative, i.e. vacuous)."""
    return -params.delta_i + params.b_syn + params.h_e_m + params.delta_eps_p


@dataclass(frozen=True)
class ClampedBound:
    """Bound value plus a flag recording that a negative (vacuous) MI
    bracket was clamped to zero under the square root."""

    value: float
    bracket_clamped: bool


def synthetic_gen_error_bound(params: BoundParams) -> ClampedBound:
    """Generalization error w.r.t. the synthetic data: gen_error_bound with
    the MI replaced by the synthetic MI bound, clamped at zero."""
    bracket = synthetic_mi_bound(params)
    clamped = bracket < 0.0
    value = gen_error_bound(max(bracket, 0.0), params.n_samples, params.sigma,
                            params.eta, params.depth)
    return ClampedBound(value=value, bracket_clamped=clamped)


def synthetic_posttrain_bound(params: BoundParams) -> ClampedBound:
    """Full post-training bound for the synthetic-data route:
    C * (tv_task + tv_gen) plus the synthetic generalization-error term."""
    divergence = params.loss_bound * (params.tv_task + params.tv_gen)
    info = synthetic_gen_error_bound(params)
    return ClampedBound(value=divergence + info.value,
                        bracket_clamped=info.bracket_clamped)


def anchor_posttrain_bound(params: BoundParams) -> float:
    """Post-training bound for the anchor-data route: gen_error_bound at
    the anchor sample size m with MI(anchor set, weights)."""
    return gen_error_bound(params.mi_anchor_w, params.m_samples, params.sigma,
                           params.eta, params.depth)


def ggmi_bound(params: BoundParams) -> float:
    """Upper bound on the generalization gain via mutual information:
    delta_i - (alpha+1) H(anchor|W) + 2 delta_h + H(gen|W) + eps_w_p."""
    return (params.delta_i
            - (params.alpha + 1.0) * params.h_anchor_given_w
            + 2.0 * params.delta_h
            + params.h_gen_given_w
            + params.eps_w_p)


# ---------------------------------------------------------------------------
# Ledger
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EstimatorBudgets:
    kl_samples: int = 100_000
    entropy_samples: int = 100_000
    tv_cells: int = 256
    hsic_permutations: int = 200

    def __post_init__(self):
        for name in ("kl_samples", "entropy_samples", "tv_cells",
                     "hsic_permutations"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class MeasuredValue:
    """One measured proxy with its uncertainty, seed, and sample budget."""

    value: float
    std_error: float | None
    seed: int
    budget: int


MEASURED_FIELDS = ("h_anchor_est", "h_gen_est", "delta_h_est", "kl_gap",
                   "hsic_anchor_gen", "tv_task_est", "tv_gen_est")
SYMBOLIC_FIELDS = ("synthetic_mi_bound", "synthetic_gen_error_bound",
                   "synthetic_posttrain_bound", "anchor_posttrain_bound",
                   "ggmi_bound")


@dataclass(frozen=True)
class BoundLedger:
    measured: dict[str, MeasuredValue]
    symbolic: dict[str, float]
    bracket_clamped: bool
    seed: int
    notes: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "measured": {
                name: {"value": mv.value, "std_error": mv.std_error,
                       "seed": mv.seed, "budget": mv.budget}
                for name, mv in self.measured.items()
            },
            "symbolic": dict(self.symbolic),
            "bracket_clamped": self.bracket_clamped,
            "seed": self.seed,
            "notes": dict(self.notes),
        }


def symbolic_bounds(params: BoundParams) -> tuple[dict[str, float], bool]:
    """Evaluate all five calculators; returns values and the clamp flag."""
    syn_gen = synthetic_gen_error_bound(params)
    posttrain = synthetic_posttrain_bound(params)
    values = {
        "synthetic_mi_bound": synthetic_mi_bound(params),
        "synthetic_gen_error_bound": syn_gen.value,
        "synthetic_posttrain_bound": posttrain.value,
        "anchor_posttrain_bound": anchor_posttrain_bound(params),
        "ggmi_bound": ggmi_bound(params),
    }
    return values, posttrain.bracket_clamped


def build_bound_ledger(gt: Gmm, model_m: Gmm, anchor: DatasetMatrix,
                       synthetic: DatasetMatrix, fit_anchor: FittedGmm,
                       fit_gen: FittedGmm, noise_scale: float,
                       params: BoundParams, budgets: EstimatorBudgets,
                       seed: int) -> BoundLedger:
    """Measure every proxy on one generation run and evaluate every
    calculator on `params`.

    TV uses the grid method when d <= 2, importance sampling otherwise.
    The HSIC pairs the first min(n_anchor, n_synthetic) rows of the two
    sets, which are independent draws, so the statistic probes dependence
    injected by the generation chain only.
    """
    measured: dict[str, MeasuredValue] = {}

    def record(name, estimate, budget):
        measured[name] = MeasuredValue(value=estimate.value,
                                       std_error=estimate.std_error,
                                       seed=estimate.seed, budget=budget)

    s = [derive_seed(seed, TAG_LEDGER, i) for i in range(8)]
    record("h_anchor_est",
           mc_entropy(fit_anchor.model, budgets.entropy_samples, s[0]),
           budgets.entropy_samples)
    record("h_gen_est",
           mc_entropy(fit_gen.model, budgets.entropy_samples, s[1]),
           budgets.entropy_samples)
    record("delta_h_est",
           delta_h(fit_anchor.model, fit_gen.model, budgets.entropy_samples, s[2]),
           budgets.entropy_samples)

    kl_anchor = mc_kl(fit_anchor.model, gt, budgets.kl_samples, s[3])
    kl_gen = mc_kl(fit_gen.model, gt, budgets.kl_samples, s[4])
    measured["kl_gap"] = MeasuredValue(
        value=kl_anchor.value - kl_gen.value,
        std_error=math.hypot(kl_anchor.std_error, kl_gen.std_error),
        seed=s[3], budget=budgets.kl_samples)

    n_common = min(anchor.n, synthetic.n)
    x = DatasetMatrix(rows=anchor.rows[:n_common], provenance=anchor.provenance,
                      seed=anchor.seed)
    y = DatasetMatrix(rows=synthetic.rows[:n_common],
                      provenance=synthetic.provenance, seed=synthetic.seed)
    h = hsic(x, y, n_permutations=budgets.hsic_permutations, seed=s[5])
    measured["hsic_anchor_gen"] = MeasuredValue(
        value=h.statistic, std_error=None, seed=s[5],
        budget=budgets.hsic_permutations)

    tv_method = "grid" if gt.dim <= 2 else "importance"
    record("tv_task_est",
           tv_distance(gt, model_m, tv_method, budgets.tv_cells, s[6]),
           budgets.tv_cells)
    record("tv_gen_est",
           tv_distance(model_m, convolve_noise(model_m, noise_scale),
                       tv_method, budgets.tv_cells, s[7]),
           budgets.tv_cells)

    symbolic, clamped = symbolic_bounds(params)
    notes = {"hsic_rows_paired": str(n_common),
             "kl_eval_common_random_numbers": "false"}
    return BoundLedger(measured=measured, symbolic=symbolic,
                       bracket_clamped=clamped, seed=int(seed), notes=notes)
