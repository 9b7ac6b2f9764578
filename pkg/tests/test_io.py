"""CSV serialization round trips and report table layout."""

import os

import numpy as np
import pytest

from cyclecast import DataError, make_panel, sample_acf
from cyclecast.io import (
    EvalRow,
    acf_tables_to_csv,
    arma_manifest,
    atomic_write,
    coefficient_manifest,
    cycle_records_to_csv,
    eval_rows_to_csv,
    last_signal_table_csv,
    panel_from_csv,
    panel_to_csv,
    read_panel,
    spacing_table_csv,
    write_coefficients,
    write_panel,
)
from cyclecast.sim.controller import CycleRecord
from cyclecast.univariate import fit_ar
from cyclecast.var import build_regression, fit_ols, fit_penalized


@pytest.fixture
def panel(rng):
    values = [40.0 + rng.uniform(0.0, 25.0, 60) for _ in range(3)]
    return make_panel(values, meta={"spacing_m": 500.0, "demand_vph": 1200.0,
                                    "seed": 3})


class TestPanelRoundTrip:
    def test_values_and_labels_survive(self, panel):
        restored = panel_from_csv(panel_to_csv(panel))
        np.testing.assert_array_equal(restored.values, panel.values)
        assert restored.component_labels == panel.component_labels

    def test_meta_survives_with_types(self, panel):
        restored = panel_from_csv(panel_to_csv(panel))
        assert restored.meta["seed"] == 3
        assert isinstance(restored.meta["seed"], int)
        assert restored.meta["spacing_m"] == 500.0

    def test_file_round_trip(self, panel, tmp_path):
        path = str(tmp_path / "panel.csv")
        write_panel(panel, path)
        restored = read_panel(path)
        np.testing.assert_array_equal(restored.values, panel.values)

    def test_serialization_is_deterministic(self, panel):
        assert panel_to_csv(panel) == panel_to_csv(panel)

    def test_full_float_precision_preserved(self):
        value = 34.0 + 1.0 / 3.0
        panel = make_panel([[value, 40.0]])
        restored = panel_from_csv(panel_to_csv(panel))
        assert restored.values[0, 0] == value

    def test_malformed_cell_rejected(self):
        text = "s1,s2\n40.0,41.0\n40.0,oops\n"
        with pytest.raises(DataError):
            panel_from_csv(text)

    def test_wrong_cell_count_rejected(self):
        text = "s1,s2\n40.0\n"
        with pytest.raises(DataError):
            panel_from_csv(text)


class TestAtomicWrite:
    def test_no_partial_file_on_failure(self, tmp_path):
        blocker = tmp_path / "not_a_dir"
        blocker.write_text("occupied")
        target = blocker / "out.csv"
        with pytest.raises(OSError):
            atomic_write(str(target), "data")
        assert not target.exists()

    def test_no_temp_file_left_behind(self, tmp_path):
        path = str(tmp_path / "out.csv")
        atomic_write(path, "payload")
        assert sorted(p.name for p in tmp_path.iterdir()) == ["out.csv"]

    def test_overwrites_in_place(self, tmp_path):
        path = str(tmp_path / "out.csv")
        atomic_write(path, "one")
        atomic_write(path, "two")
        with open(path) as fh:
            assert fh.read() == "two"


class TestCycleRecordsCsv:
    def test_header_and_padding(self):
        records = [
            CycleRecord(signal_id=1, cycle_index=0, cycle_length_s=34.0,
                        per_phase_green_s=(12.0, 12.0), start_time_s=900.0),
            CycleRecord(signal_id=2, cycle_index=0, cycle_length_s=40.0,
                        per_phase_green_s=(20.0,), start_time_s=900.0),
        ]
        text = cycle_records_to_csv(records)
        lines = text.strip().split("\n")
        assert lines[0] == ("signal_id,cycle_index,start_time_s,"
                            "cycle_length_s,green_1_s,green_2_s")
        assert lines[1] == "1,0,900.0,34.0,12.0,12.0"
        assert lines[2] == "2,0,900.0,40.0,20.0,"


class TestAcfCsv:
    def test_tables_stack_with_pair_columns(self, panel):
        tables = [sample_acf(panel, i, j, max_lag=2)
                  for i in range(2) for j in range(2)]
        text = acf_tables_to_csv(tables)
        lines = text.strip().split("\n")
        assert lines[0] == "i,j,lag,correlation"
        assert len(lines) == 1 + 4 * 3
        assert lines[1].startswith("0,0,0,1.0")


class TestCoefficientExport:
    def test_ols_manifest_has_no_lambda_line(self, panel):
        model = fit_ols(build_regression(panel.values, 1))
        text = coefficient_manifest(model)
        assert "penalty=none" in text
        assert "lambda" not in text
        assert "iterations=0" in text

    def test_penalized_manifest_lists_lambda(self, panel):
        reg = build_regression(panel.values, 2)
        model = fit_penalized(reg, "hglasso", 3.5)
        text = coefficient_manifest(model)
        assert "penalty=hglasso" in text
        assert "lambda=3.5" in text
        assert "p=2" in text

    def test_write_coefficients_emits_matrix_per_lag(self, panel, tmp_path):
        reg = build_regression(panel.values, 2)
        model = fit_penalized(reg, "lasso", 1.0)
        files = write_coefficients(model, str(tmp_path))
        names = sorted(os.path.basename(f) for f in files)
        assert names == ["manifest.txt", "phi_lag1.csv", "phi_lag2.csv"]
        grid = np.loadtxt(tmp_path / "phi_lag1.csv", delimiter=",")
        np.testing.assert_allclose(grid, model.lag_matrices[0])

    def test_arma_manifest_lists_orders(self, panel):
        models = [fit_ar(panel.component(i), 1) for i in range(3)]
        text = arma_manifest(models, labels=panel.component_labels)
        assert "[s1]" in text and "[s3]" in text
        assert "p=1" in text and "q=0" in text


class TestEvalTables:
    def rows(self):
        out = []
        for spacing in (200.0, 500.0):
            for demand in (800.0, 1200.0):
                for seed in (1, 2):
                    for family, lag in (("avg", None), ("var", 1)):
                        base = 10.0 + demand / 100.0 + seed
                        out.append(EvalRow(
                            spacing_m=spacing, demand_vph=demand, seed=seed,
                            family=family, lag=lag, lam=None,
                            mspe=base + (1.0 if family == "avg" else 0.0),
                            last_signal_mspe=base / 2.0))
        return out

    def test_raw_csv_blank_for_missing_fields(self):
        text = eval_rows_to_csv(self.rows())
        lines = text.strip().split("\n")
        assert lines[0] == ("spacing_m,demand_vph,seed,family,lag,"
                            "lambda,mspe,mspe_last_signal")
        assert lines[1].split(",")[4] == ""  # avg row has no lag

    def test_spacing_table_medians_over_seeds(self):
        text = spacing_table_csv(self.rows(), 200.0)
        lines = text.strip().split("\n")
        assert lines[0] == "# spacing_m=200.0"
        assert lines[1] == "family,lag,800,1200"
        # avg at demand 800: seeds give 20, 21 -> median 20.5
        assert lines[2] == "avg,,20.5,24.5"
        assert lines[3] == "var,1,19.5,23.5"

    def test_last_signal_table_groups_by_spacing(self):
        text = last_signal_table_csv(self.rows())
        assert "# spacing_m=200" in text
        assert "# spacing_m=500" in text
