"""Figure rendering: golden-file comparison and distribution-view contract."""

import shutil
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np
import pytest

from rblab_plots import FigureSpec, plot_distributions, plot_kl_gap
from rblab_plots.cli import main_dist, main_kl_gap
from rblab_plots.figures import mixture_log_density, read_aggregate_csv, read_model_file

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden" / "kl_gap_reference.png"
AGGREGATES = tuple(str(DATA / f"kl_gap_{v}_aggregate.csv") for v in "JKL")
RUN = DATA / "run"


class TestKlGapFigure:
    def test_three_csvs_make_three_panels(self, tmp_path):
        out = tmp_path / "fig.png"
        plot_kl_gap(FigureSpec(input_paths=AGGREGATES, output_path=str(out)))
        img = plt.imread(out)
        assert img.shape[1] > img.shape[0] * 2  # wide three-panel layout

    def test_single_row_csv_renders(self, tmp_path):
        single = tmp_path / "single.csv"
        single.write_text("variable,value,mean_gap,std_gap,n_rounds\n"
                          "J,2,0.5,0.0,1\n")
        out = tmp_path / "single.png"
        plot_kl_gap(FigureSpec(input_paths=(str(single),), output_path=str(out)))
        assert out.exists()

    def test_schema_mismatch_lists_missing_columns(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("variable,value,score\nJ,2,1.0\n")
        with pytest.raises(ValueError, match="mean_gap"):
            read_aggregate_csv(str(bad))

    def test_golden_file_pixel_identical(self, tmp_path):
        out = tmp_path / "fig.png"
        plot_kl_gap(FigureSpec(input_paths=AGGREGATES, output_path=str(out),
                               dpi=100))
        rendered = plt.imread(out)
        reference = plt.imread(GOLDEN)
        assert rendered.shape == reference.shape
        assert np.array_equal(rendered, reference)

    def test_inputs_never_modified(self, tmp_path):
        copies = []
        for src in AGGREGATES:
            dst = tmp_path / Path(src).name
            shutil.copy(src, dst)
            copies.append((dst, dst.read_bytes()))
        plot_kl_gap(FigureSpec(
            input_paths=tuple(str(c[0]) for c in copies),
            output_path=str(tmp_path / "fig.png")))
        for path, before in copies:
            assert path.read_bytes() == before

    def test_cli_entry_point(self, tmp_path):
        out = tmp_path / "cli.png"
        assert main_kl_gap(["--inputs", *AGGREGATES, "--out", str(out)]) == 0
        assert out.exists()
        assert main_kl_gap(["--inputs", str(tmp_path / "missing.csv"),
                            "--out", str(out)]) == 1


class TestDistributionFigure:
    def test_default_simulate_output_renders(self, tmp_path):
        out = tmp_path / "dist.png"
        plot_distributions(str(RUN / "anchor.csv"), str(RUN / "synthetic.csv"),
                           (str(RUN / "gt.model"), str(RUN / "model_m.model")),
                           str(out))
        assert out.exists() and out.stat().st_size > 0

    def test_empty_synthetic_file_rejected(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("x0,x1,component,provenance\n")
        with pytest.raises(ValueError, match="no data rows"):
            plot_distributions(str(RUN / "anchor.csv"), str(empty),
                               (str(RUN / "gt.model"),), str(tmp_path / "x.png"))

    def test_non_2d_data_rejected(self, tmp_path):
        one_d = tmp_path / "one_d.csv"
        one_d.write_text("x0,component,provenance\n1.0,0,anchor\n2.0,0,anchor\n")
        with pytest.raises(ValueError, match="two-dimensional"):
            plot_distributions(str(one_d), str(one_d),
                               (str(RUN / "gt.model"),), str(tmp_path / "x.png"))

    def test_contour_levels_monotone_in_density(self):
        # the density evaluated at the model means must dominate the grid
        # quantile levels used for the contours
        model = read_model_file(str(RUN / "gt.model"))
        dens_at_means = mixture_log_density(model, model["means"])
        rng = np.random.default_rng(1)
        far = rng.uniform(30, 40, size=(50, 2))
        dens_far = mixture_log_density(model, far)
        assert dens_at_means.min() > dens_far.max()

    def test_cli_entry_point(self, tmp_path):
        out = tmp_path / "dist-cli.png"
        code = main_dist(["--anchor", str(RUN / "anchor.csv"),
                          "--gen", str(RUN / "synthetic.csv"),
                          "--gt", str(RUN / "gt.model"),
                          "--out", str(out)])
        assert code == 0 and out.exists()
