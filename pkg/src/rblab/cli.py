"""Command-line front end: config parsing, subcommands, manifests.

Subcommands: simulate, fit, kl-gap, estimate, verify, bounds.
One JSON config file (nested sections) plus flag overrides; flags win.
Every command writes a manifest holding the complete effective
configuration and the seeds it consumed; feeding a manifest back through
--config replays the run and reproduces all numeric outputs bit-exactly.

Exit codes: 0 success, 1 validation or usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from dataclasses import dataclass, replace

from . import __version__
from .bounds import (BoundParams, EstimatorBudgets, build_bound_ledger,
                     symbolic_bounds)
from .em import FitConfig, fit_gmm
from .estimators import delta_h, hsic, mc_entropy, mc_kl, tv_distance
from .experiments import (SweepSpec, run_generation, run_kl_gap_sweep,
                          sweep_aggregate_csv, sweep_raw_csv,
                          verify_tv_risk_bound)
from .generation import GenerationConfig
from .gmm import (_atomic_write_text, dataset_from_csv, dataset_to_csv,
                  load_gmm, save_gmm)
from .seeding import (TAG_ANCHOR, TAG_GT, TAG_MODEL_M, TAG_NOISE,
                      TAG_SYNTHETIC, derive_seed)

ENV_OUTPUT = "RBLAB_OUTPUT"
_DEFAULT_OUTPUT = "rblab-output"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # usage problems are validation errors (exit 1), not runtime failures
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


@dataclass(frozen=True)
class RunConfig:
    """Effective configuration of one invocation, defaults materialized."""

    generation: GenerationConfig
    fit: FitConfig
    budgets: EstimatorBudgets
    output_dir: str
    sweep: dict | None = None          # variable/values/rounds/resamples
    bound_params: BoundParams | None = None
    extras: dict = dataclasses.field(default_factory=dict)


def _from_doc(cls, doc: dict, section: str):
    allowed = {f.name for f in dataclasses.fields(cls)}
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"{section}: unknown keys {sorted(unknown)}")
    try:
        return cls(**doc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{section}: {exc}") from None


def load_config(path: str | None, overrides: argparse.Namespace) -> RunConfig:
    doc: dict = {}
    if path:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        if "rblab_manifest" in doc:
            doc = doc.get("config", {})

    gen_doc = dict(doc.get("generation", {}))
    if getattr(overrides, "seed", None) is not None:
        gen_doc["master_seed"] = overrides.seed
    generation = _from_doc(GenerationConfig, gen_doc, "generation")

    fit_doc = dict(doc.get("fit", {}))
    fit_doc.setdefault("n_components", generation.k_anchor
                       + generation.j_unsampled + generation.l_irrelevant)
    fit = _from_doc(FitConfig, fit_doc, "fit")

    budgets = _from_doc(EstimatorBudgets, dict(doc.get("budgets", {})), "budgets")

    output_dir = (getattr(overrides, "output", None)
                  or doc.get("output_dir")
                  or os.environ.get(ENV_OUTPUT)
                  or _DEFAULT_OUTPUT)

    sweep = doc.get("sweep")
    if sweep is not None and not isinstance(sweep, dict):
        raise ConfigError("sweep: must be an object")

    bound_params = None
    if doc.get("bound_params") is not None:
        bound_params = _from_doc(BoundParams, dict(doc["bound_params"]),
                                 "bound_params")

    extras = {k: v for k, v in doc.items()
              if k not in ("generation", "fit", "budgets", "output_dir",
                           "sweep", "bound_params")}
    return RunConfig(generation=generation, fit=fit, budgets=budgets,
                     output_dir=str(output_dir), sweep=sweep,
                     bound_params=bound_params, extras=extras)


def config_to_doc(config: RunConfig, **extra_sections) -> dict:
    doc = {
        "generation": dataclasses.asdict(config.generation),
        "fit": dataclasses.asdict(config.fit),
        "budgets": dataclasses.asdict(config.budgets),
        "output_dir": config.output_dir,
    }
    if config.sweep is not None:
        doc["sweep"] = dict(config.sweep)
    if config.bound_params is not None:
        doc["bound_params"] = dataclasses.asdict(config.bound_params)
    doc.update(config.extras)
    doc.update(extra_sections)
    return doc


def _ensure_output_dir(path: str) -> str:
    try:
        os.makedirs(path, exist_ok=True)
        probe = os.path.join(path, ".rblab-writable")
        with open(probe, "w", encoding="utf-8") as fh:
            fh.write("")
        os.remove(probe)
    except OSError as exc:
        raise ConfigError(f"output directory {path!r} is not writable: {exc}") from None
    return path


def _write_manifest(out_dir: str, command: str, config: RunConfig,
                    seeds: dict, outputs: dict, threads: int,
                    started: float, results: dict | None = None,
                    **extra_sections) -> str:
    manifest = {
        "rblab_manifest": 1,
        "command": command,
        "config": config_to_doc(config, **extra_sections),
        "seeds": seeds,
        "seed_derivation": "numpy SeedSequence([master, *stage_tags])",
        "threads": threads,
        "library_version": __version__,
        "wall_clock_seconds": time.monotonic() - started,
        "created_unix": time.time(),
        "outputs": outputs,
    }
    if results is not None:
        manifest["results"] = results
    path = os.path.join(out_dir, f"manifest_{command.replace('-', '_')}.json")
    _atomic_write_text(path, json.dumps(manifest, indent=2) + "\n")
    return path


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    started = time.monotonic()
    config = load_config(args.config, args)
    out = _ensure_output_dir(config.output_dir)
    run = run_generation(config.generation)
    gt_path = os.path.join(out, "gt.model")
    m_path = os.path.join(out, "model_m.model")
    anchor_path = os.path.join(out, "anchor.csv")
    synthetic_path = os.path.join(out, "synthetic.csv")
    save_gmm(run.gt, gt_path)
    save_gmm(run.model_m, m_path)
    dataset_to_csv(run.anchor, anchor_path)
    dataset_to_csv(run.synthetic, synthetic_path)
    master = config.generation.master_seed
    seeds = {
        "master": master,
        "gt": derive_seed(master, TAG_GT),
        "model_m": derive_seed(master, TAG_MODEL_M),
        "anchor": run.anchor.seed,
        "synthetic": run.synthetic.seed,
        "noise": derive_seed(master, TAG_NOISE),
    }
    outputs = {"gt_model": gt_path, "model_m": m_path,
               "anchor_csv": anchor_path, "synthetic_csv": synthetic_path}
    _write_manifest(out, "simulate", config, seeds, outputs, args.threads, started)
    print(f"wrote {len(outputs)} artifacts to {out}")
    return EXIT_OK


def cmd_fit(args) -> int:
    started = time.monotonic()
    config = load_config(args.config, args)
    data_path = args.data or config.extras.get("fit_data")
    if not data_path:
        raise ConfigError("fit: a dataset CSV is required")
    out = _ensure_output_dir(config.output_dir)
    data = dataset_from_csv(data_path)
    fit_cfg = config.fit
    if args.components is not None:
        fit_cfg = replace(fit_cfg, n_components=args.components)
    if args.seed is not None:
        fit_cfg = replace(fit_cfg, seed=args.seed)
    config = replace(config, fit=fit_cfg)
    fitted = fit_gmm(data, fit_cfg)
    model_path = os.path.join(out, "fitted.model")
    save_gmm(fitted.model, model_path)
    results = {
        "final_log_likelihood": fitted.final_log_likelihood,
        "n_iter": fitted.n_iter,
        "converged": fitted.converged,
        "restart_index": fitted.restart_index,
    }
    _write_manifest(out, "fit", config, {"fit": fit_cfg.seed},
                    {"model": model_path}, args.threads, started,
                    results=results, fit_data=str(data_path))
    print(f"final_log_likelihood={fitted.final_log_likelihood!r} "
          f"converged={fitted.converged} n_iter={fitted.n_iter}")
    return EXIT_OK


def _sweep_spec_from(config: RunConfig, args) -> SweepSpec:
    sweep_doc = dict(config.sweep or {})
    variable = getattr(args, "variable", None) or sweep_doc.get("variable")
    if not variable:
        raise ConfigError("kl-gap: a swept variable (K, J or L) is required")
    values = sweep_doc.get("values", list(range(2, 16)))
    if getattr(args, "values", None):
        values = _parse_values(args.values)
    rounds = (args.rounds if getattr(args, "rounds", None) is not None
              else sweep_doc.get("rounds", 100))
    resamples = (args.resamples if getattr(args, "resamples", None) is not None
                 else sweep_doc.get("resamples_per_round", 100))
    return SweepSpec(variable=str(variable), values=tuple(int(v) for v in values),
                     rounds=int(rounds), resamples_per_round=int(resamples),
                     base_config=config.generation, fit_config=config.fit)


def _parse_values(text: str) -> list[int]:
    text = text.strip()
    if ":" in text:
        lo, hi = text.split(":", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",") if v]


def cmd_kl_gap(args) -> int:
    started = time.monotonic()
    config = load_config(args.config, args)
    spec = _sweep_spec_from(config, args)
    config = replace(config, sweep={
        "variable": spec.variable, "values": list(spec.values),
        "rounds": spec.rounds, "resamples_per_round": spec.resamples_per_round})
    out = _ensure_output_dir(config.output_dir)

    def progress(cell):
        print(f"value={cell.value} round={cell.round_index} "
              f"kl_gap={cell.kl_gap:.6f}", file=sys.stderr)

    result = run_kl_gap_sweep(spec, threads=args.threads, progress=progress)
    raw_path = os.path.join(out, f"kl_gap_{spec.variable}_raw.csv")
    agg_path = os.path.join(out, f"kl_gap_{spec.variable}_aggregate.csv")
    _atomic_write_text(raw_path, sweep_raw_csv(result))
    _atomic_write_text(agg_path, sweep_aggregate_csv(result))
    seeds = {"master": config.generation.master_seed,
             "rounds": "per-round seeds recorded in the raw CSV"}
    _write_manifest(out, "kl-gap", config, seeds,
                    {"raw_csv": raw_path, "aggregate_csv": agg_path},
                    args.threads, started)
    print(f"wrote {raw_path} and {agg_path}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    started = time.monotonic()
    config = load_config(args.config, args)
    section = dict(config.extras.get("estimate", {}))
    kind = args.kind or section.get("kind")
    if kind not in ("kl", "entropy", "tv", "hsic", "delta-h"):
        raise ConfigError(f"estimate: unknown kind {kind!r}")

    def arg_or(name, default=None):
        v = getattr(args, name.replace("-", "_"), None)
        return v if v is not None else section.get(name, default)

    budget = arg_or("budget")
    seed = args.seed if args.seed is not None else section.get("seed", 0)
    out = _ensure_output_dir(config.output_dir)

    if kind in ("kl", "tv", "delta-h"):
        p_path, q_path = arg_or("p"), arg_or("q")
        if not p_path or not q_path:
            raise ConfigError(f"estimate {kind}: --p and --q model files required")
        p, q = load_gmm(p_path), load_gmm(q_path)
        if kind == "kl":
            est = mc_kl(p, q, int(budget or config.budgets.kl_samples), seed)
        elif kind == "delta-h":
            est = delta_h(p, q, int(budget or config.budgets.entropy_samples), seed)
        else:
            method = arg_or("method", "grid")
            est = tv_distance(p, q, method,
                              int(budget or config.budgets.tv_cells), seed)
        first, second = est.value, est.std_error
        results = {"value": est.value, "std_error": est.std_error,
                   "n_samples": est.n_samples, "seed": est.seed}
        section.update({"kind": kind, "p": p_path, "q": q_path,
                        "budget": est.n_samples, "seed": seed})
        if kind == "tv":
            section["method"] = arg_or("method", "grid")
    elif kind == "entropy":
        p_path = arg_or("p")
        if not p_path:
            raise ConfigError("estimate entropy: --p model file required")
        est = mc_entropy(load_gmm(p_path),
                         int(budget or config.budgets.entropy_samples), seed)
        first, second = est.value, est.std_error
        results = {"value": est.value, "std_error": est.std_error,
                   "n_samples": est.n_samples, "seed": est.seed}
        section.update({"kind": kind, "p": p_path, "budget": est.n_samples,
                        "seed": seed})
    else:  # hsic
        x_path, y_path = arg_or("x"), arg_or("y")
        if not x_path or not y_path:
            raise ConfigError("estimate hsic: --x and --y dataset CSVs required")
        x = dataset_from_csv(x_path)
        y = dataset_from_csv(y_path)
        n_perm = int(budget or config.budgets.hsic_permutations)
        res = hsic(x, y, n_permutations=n_perm, seed=seed)
        first, second = res.statistic, res.permutation_p
        results = {"statistic": res.statistic, "permutation_p": res.permutation_p,
                   "bandwidth_x": res.bandwidth_x, "bandwidth_y": res.bandwidth_y,
                   "n_permutations": res.n_permutations, "seed": seed}
        section.update({"kind": kind, "x": x_path, "y": y_path,
                        "budget": n_perm, "seed": seed})

    if args.save:
        _atomic_write_text(args.save, json.dumps(results, indent=2) + "\n")
    _write_manifest(out, "estimate", config, {"estimate": seed}, {},
                    args.threads, started, results=results, estimate=section)
    print(f"{first!r}\t{second!r}")
    return EXIT_OK


def cmd_verify(args) -> int:
    started = time.monotonic()
    config = load_config(args.config, args)
    section = dict(config.extras.get("verify", {}))
    trials = args.trials if args.trials is not None else section.get("trials")
    seed = args.seed if args.seed is not None else section.get("seed", 0)
    if not trials or int(trials) < 1:
        raise ConfigError("verify: --trials must be a positive integer")
    out = _ensure_output_dir(config.output_dir)
    report = verify_tv_risk_bound(int(trials), int(seed))
    results = {"n_trials": report.n_trials, "n_violations": report.n_violations,
               "min_slack": report.min_slack, "mean_slack": report.mean_slack,
               "max_slack": report.max_slack, "seed": report.seed}
    _write_manifest(out, "verify", config, {"verify": int(seed)}, {},
                    args.threads, started, results=results,
                    verify={"trials": int(trials), "seed": int(seed)})
    print(f"trials={report.n_trials} violations={report.n_violations} "
          f"min_slack={report.min_slack!r} mean_slack={report.mean_slack!r}")
    return EXIT_OK if report.all_hold else EXIT_RUNTIME


def cmd_bounds(args) -> int:
    started = time.monotonic()
    config = load_config(args.config, args)
    params = config.bound_params
    if args.params:
        with open(args.params, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        params = _from_doc(BoundParams, dict(doc), "bound_params")
    if params is None:
        params = BoundParams()
    config = replace(config, bound_params=params)
    out = _ensure_output_dir(config.output_dir)
    seed = args.seed if args.seed is not None else config.generation.master_seed

    run_dir = args.run_dir or config.extras.get("run_dir")
    if run_dir:
        gt = load_gmm(os.path.join(run_dir, "gt.model"))
        model_m = load_gmm(os.path.join(run_dir, "model_m.model"))
        anchor = dataset_from_csv(os.path.join(run_dir, "anchor.csv"))
        synthetic = dataset_from_csv(os.path.join(run_dir, "synthetic.csv"))
        fit_anchor = fit_gmm(anchor, config.fit)
        fit_gen = fit_gmm(synthetic, config.fit)
        ledger = build_bound_ledger(
            gt, model_m, anchor, synthetic, fit_anchor, fit_gen,
            config.generation.noise_scale, params, config.budgets, seed)
        doc = ledger.to_dict()
    else:
        symbolic, clamped = symbolic_bounds(params)
        doc = {"measured": {}, "symbolic": symbolic,
               "bracket_clamped": clamped, "seed": seed, "notes": {}}

    ledger_path = os.path.join(out, "bounds_ledger.json")
    _atomic_write_text(ledger_path, json.dumps(doc, indent=2) + "\n")
    _write_manifest(out, "bounds", config, {"ledger": seed},
                    {"ledger": ledger_path}, args.threads, started,
                    results=doc, run_dir=str(run_dir) if run_dir else None)
    print(json.dumps(doc, indent=2))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (or a manifest to replay)")
    common.add_argument("--seed", type=int, help="override the master seed")
    common.add_argument("--output", help=f"output directory (default ${ENV_OUTPUT} or {_DEFAULT_OUTPUT!r})")
    common.add_argument("--threads", type=int, default=1,
                        help="worker cap; results are identical for any value")

    parser = _Parser(prog="rblab",
                     description="Gaussian-mixture generation lab: simulate, "
                                 "fit, sweep, estimate, verify, bounds")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common],
                       help="build ground truth and model, draw both datasets")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", parents=[common],
                       help="EM-fit a mixture to a dataset CSV")
    p.add_argument("data", nargs="?", help="dataset CSV")
    p.add_argument("--components", type=int, help="number of components")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("kl-gap", parents=[common],
                       help="sweep a component count and record the KL gap")
    p.add_argument("--variable", choices=("K", "J", "L"))
    p.add_argument("--values", help="comma list or lo:hi range (default 2:15)")
    p.add_argument("--rounds", type=int)
    p.add_argument("--resamples", type=int)
    p.set_defaults(func=cmd_kl_gap)

    p = sub.add_parser("estimate", parents=[common],
                       help="run one estimator and print value<TAB>std_error")
    p.add_argument("kind", nargs="?",
                   choices=("kl", "entropy", "tv", "hsic", "delta-h"))
    p.add_argument("--p", help="first model file")
    p.add_argument("--q", help="second model file")
    p.add_argument("--x", help="first dataset CSV (hsic)")
    p.add_argument("--y", help="second dataset CSV (hsic)")
    p.add_argument("--method", choices=("grid", "importance"),
                   help="tv integration method")
    p.add_argument("--budget", type=int, help="samples / cells / permutations")
    p.add_argument("--save", help="also write the result as JSON here")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("verify", parents=[common],
                       help="randomized exact check of the TV risk bound")
    p.add_argument("--trials", type=int)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bounds", parents=[common],
                       help="evaluate bound calculators, optionally with "
                            "measured proxies from a simulate run")
    p.add_argument("--params", help="BoundParams JSON file")
    p.add_argument("--run-dir", help="directory with simulate outputs")
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
