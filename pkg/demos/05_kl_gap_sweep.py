"""A desk-scale KL-Gap sweep.

The KL Gap of a round is KL(fit(anchor) || target) - KL(fit(synthetic) ||
target); positive numbers mean the synthetic-data fit lands closer to the
target.  The full-size sweep (values 2..15, 30+ rounds) lives in the
acceptance suite and the `rblab kl-gap` command; this demo runs a small
one so it finishes in about a minute.
"""

from rblab import (FitConfig, GenerationConfig, SweepSpec, run_kl_gap_sweep,
                   sweep_aggregate_csv)

spec = SweepSpec(
    variable="J",
    values=(2, 5, 8, 11, 14),
    rounds=3,
    resamples_per_round=5,
    base_config=GenerationConfig(master_seed=2025),
    fit_config=FitConfig(n_components=1, seed=0),
)

result = run_kl_gap_sweep(spec, threads=2)
print(sweep_aggregate_csv(result))
print("mean gap should rise with J:")
for value, gap in zip(result.values, result.mean_gap):
    bar = "#" * max(0, int(8 + gap))
    print(f"  J={value:>2}  gap={gap:+7.3f}  {bar}")
