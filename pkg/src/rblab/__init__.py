"""Gaussian-mixture laboratory for the synthetic-data generation process.

Core objects: immutable mixtures (`Gmm`), seeded sample matrices
(`DatasetMatrix`), EM fitting, Monte-Carlo divergence and entropy
estimators, HSIC, the simulated anchor/synthetic generation chain,
KL-Gap sweeps, and generalization-bound calculators.
"""

__version__ = "0.1.0"

from .bounds import (BoundLedger, BoundParams, ClampedBound, EstimatorBudgets,
                     anchor_posttrain_bound, build_bound_ledger,
                     contraction_factor, gen_error_bound, ggmi_bound,
                     symbolic_bounds, synthetic_gen_error_bound,
                     synthetic_mi_bound, synthetic_posttrain_bound)
from .em import FitConfig, FittedGmm, fit_gmm, responsibilities
from .estimators import (HsicResult, McEstimate, delta_h, hsic, mc_entropy,
                         mc_kl, tv_distance)
from .experiments import (GenerationRun, RiskBoundReport, SweepResult,
                          SweepRound, SweepSpec, default_sweep_spec,
                          run_generation, run_kl_gap_round, run_kl_gap_sweep,
                          sweep_aggregate_csv, sweep_raw_csv,
                          verify_tv_risk_bound)
from .generation import (AffineTransform, GenerationConfig,
                         anchor_distribution, build_gt_gmm, build_model_m,
                         convolve_noise, pushforward_log_pdf, sample_anchor,
                         sample_synthetic)
from .gmm import (DatasetMatrix, GaussianComponent, Gmm, dataset_from_csv,
                  dataset_to_csv, gaussian_entropy, gaussian_kl, load_gmm,
                  save_gmm)
from .seeding import derive_seed

__all__ = [
    "AffineTransform", "BoundLedger", "BoundParams", "ClampedBound",
    "DatasetMatrix", "EstimatorBudgets", "FitConfig", "FittedGmm",
    "GaussianComponent", "GenerationConfig", "GenerationRun", "Gmm",
    "HsicResult", "McEstimate", "RiskBoundReport", "SweepResult",
    "SweepRound", "SweepSpec", "anchor_distribution",
    "anchor_posttrain_bound", "build_bound_ledger", "build_gt_gmm",
    "build_model_m", "contraction_factor", "convolve_noise",
    "dataset_from_csv", "dataset_to_csv", "default_sweep_spec", "delta_h",
    "derive_seed", "fit_gmm", "gaussian_entropy", "gaussian_kl",
    "gen_error_bound", "ggmi_bound", "hsic", "load_gmm", "mc_entropy",
    "mc_kl", "pushforward_log_pdf", "responsibilities", "run_generation",
    "run_kl_gap_round", "run_kl_gap_sweep", "sample_anchor",
    "sample_synthetic", "save_gmm", "sweep_aggregate_csv", "sweep_raw_csv",
    "symbolic_bounds", "synthetic_gen_error_bound", "synthetic_mi_bound",
    "synthetic_posttrain_bound", "tv_distance", "verify_tv_risk_bound",
]
