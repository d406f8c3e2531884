"""End-to-end checks for the command-line interface.

Commands run in process through the entry point so exit codes and stdout
are observable; one test drives the installed console script for real.
"""

from __future__ import annotations

import subprocess

import numpy as np
import pytest

from privseq import cli as cli_module
from privseq.abtest import ABConfig, ab_lower_cs, privatize_pseudo_outcomes, weak_null_eprocess
from privseq.cli import main
from privseq.confseq import hoeffding_cs, pmkelly_ci
from privseq.eprocess import NullHypothesis, test_via_cs as decide_via_cs
from privseq.experiments import ExperimentConfig, run_experiment
from privseq.mechanisms import PrivacyParams, RandomSource, nprr_privatize_batch, r_of
from privseq.recordio import (
    read_bounds,
    read_decision,
    read_interval,
    read_records,
    read_table,
    write_values,
)


@pytest.fixture()
def values_file(tmp_path):
    rng = np.random.default_rng(5)
    path = tmp_path / "x.csv"
    write_values(path, rng.beta(10.0, 30.0, size=200), fmt="csv")
    return path


@pytest.fixture()
def record_file(tmp_path, values_file):
    path = tmp_path / "rec.csv"
    assert main(["privatize", str(values_file), "--grid", "3", "--epsilon", "2",
                 "--seed", "9", "--output", str(path)]) == 0
    return path


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "privatize" in capsys.readouterr().out


def test_tune_prints_rate_grid_and_achieved_budget(capsys):
    assert main(["tune", "--epsilon", "2"]) == 0
    header, row = capsys.readouterr().out.strip().splitlines()
    assert header == "r,G,epsilon"
    r_text, G_text, eps_text = row.split(",")
    assert float(r_text) == pytest.approx(r_of(2.0, 1), abs=1e-12)
    assert int(G_text) >= 1
    assert float(eps_text) == pytest.approx(2.0, abs=1e-9)


def test_tune_json_format(capsys):
    import json

    assert main(["tune", "--epsilon", "4", "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert set(payload) == {"r", "G", "epsilon"}
    assert payload["epsilon"] == pytest.approx(4.0, abs=1e-9)


def test_privatize_matches_library_draws(record_file):
    rng = np.random.default_rng(5)
    x = rng.beta(10.0, 30.0, size=200)
    expected = nprr_privatize_batch(
        x, PrivacyParams(r=r_of(2.0, 3), G=3), RandomSource(9).generator(0)
    )
    batch = read_records(record_file, "csv")
    assert np.array_equal(batch.z, expected.z)
    assert np.array_equal(batch.r, expected.r)
    assert np.array_equal(batch.G, expected.G)


def test_privatize_then_cs_file_round_trip_equals_in_memory(tmp_path, record_file):
    bounds_path = tmp_path / "bounds.csv"
    assert main(["cs", str(record_file), "--method", "nprr-hoeffding",
                 "--alpha", "0.1", "--output", str(bounds_path)]) == 0
    from_file = read_bounds(bounds_path, "csv")
    in_memory = hoeffding_cs(read_records(record_file, "csv"), alpha=0.1)
    assert np.array_equal(from_file.t, in_memory.t)
    assert np.array_equal(from_file.estimate, in_memory.estimate)
    assert np.array_equal(from_file.lower, in_memory.lower)
    assert np.array_equal(from_file.upper, in_memory.upper)


def test_pipeline_reruns_are_byte_identical(tmp_path, values_file):
    args = ["privatize", str(values_file), "--grid", "2", "--epsilon", "3", "--seed", "21"]
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    assert main(args + ["--output", str(first)]) == 0
    assert main(args + ["--output", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_stdout_matches_file_output(tmp_path, record_file, capsys):
    path = tmp_path / "bounds.csv"
    assert main(["cs", str(record_file), "--output", str(path)]) == 0
    capsys.readouterr()
    assert main(["cs", str(record_file)]) == 0
    assert capsys.readouterr().out == path.read_text()


def test_method_aliases_resolve_to_the_same_output(tmp_path, record_file):
    short = tmp_path / "short.csv"
    canonical = tmp_path / "canonical.csv"
    assert main(["cs", str(record_file), "--method", "nprr-hoeffding",
                 "--output", str(short)]) == 0
    assert main(["cs", str(record_file), "--method", "nprr-hoeffding-cs",
                 "--output", str(canonical)]) == 0
    assert short.read_bytes() == canonical.read_bytes()


def test_ci_matches_library(tmp_path, record_file):
    path = tmp_path / "interval.csv"
    assert main(["ci", str(record_file), "--method", "nprr-pmkelly",
                 "--alpha", "0.1", "--output", str(path)]) == 0
    interval, n = read_interval(path, "csv")
    expected = pmkelly_ci(read_records(record_file, "csv"), n=200, alpha=0.1)
    assert n == 200
    assert interval.lower == expected.lower
    assert interval.upper == expected.upper


def test_ci_count_mismatch_is_an_input_error(record_file, capsys):
    assert main(["ci", str(record_file), "--n", "50"]) == 1
    assert "50" in capsys.readouterr().err


def test_test_null_grammar(tmp_path, record_file, capsys):
    out = tmp_path / "d.csv"
    for null in ("le=0.5", "ge=0.5", "point=0.5", "interval=0.2:0.4"):
        assert main(["test", str(record_file), "--method", "nprr-hoeffding",
                     "--null", null, "--output", str(out)]) == 0
    for bad in ("le0.5", "interval=0.2", "ge=x", "between=0.1:0.2"):
        assert main(["test", str(record_file), "--null", bad]) == 1
        assert capsys.readouterr().err


def test_hoeffding_eprocess_handles_both_null_directions(tmp_path):
    rng = np.random.default_rng(2)
    values = tmp_path / "x.csv"
    write_values(values, (rng.random(500) < 0.2).astype(float), fmt="csv")
    records = tmp_path / "rec.csv"
    assert main(["privatize", str(values), "--mechanism", "sirr", "--epsilon", "3",
                 "--output", str(records)]) == 0
    kept = tmp_path / "keep.csv"
    rejected = tmp_path / "reject.csv"
    common = ["test", str(records), "--method", "hoeffding-eprocess"]
    assert main(common + ["--null", "ge=0.6", "--output", str(rejected)]) == 0
    assert main(common + ["--null", "le=0.6", "--output", str(kept)]) == 0
    assert read_decision(rejected, "csv").rejected
    assert not read_decision(kept, "csv").rejected


def test_cs_based_test_matches_library_decision(tmp_path, record_file):
    path = tmp_path / "d.csv"
    assert main(["test", str(record_file), "--method", "nprr-hoeffding",
                 "--null", "point=0.9", "--alpha", "0.1", "--output", str(path)]) == 0
    series = hoeffding_cs(read_records(record_file, "csv"), alpha=0.1)
    expected = decide_via_cs(series, NullHypothesis.point(0.9), 0.1)
    assert read_decision(path, "csv") == expected


def _ab_inputs(tmp_path):
    rng = np.random.default_rng(8)
    x = rng.random(300)
    arms = rng.integers(0, 2, size=300)
    path = tmp_path / "xa.csv"
    write_values(path, x, arms=arms, fmt="csv")
    return path, x, arms


def test_abtest_lower_cs_matches_library(tmp_path):
    values, x, arms = _ab_inputs(tmp_path)
    records = tmp_path / "ab.csv"
    bounds = tmp_path / "bounds.csv"
    assert main(["privatize", str(values), "--epsilon", "2", "--seed", "3",
                 "--output", str(records)]) == 0
    assert main(["abtest", str(records), "--method", "lower-cs", "--epsilon", "2",
                 "--output", str(bounds)]) == 0
    config = ABConfig(pi=0.5, mechanism=PrivacyParams(r=r_of(2.0, 1), G=1), alpha=0.05)
    expected_records = privatize_pseudo_outcomes(x, arms, config, RandomSource(3).generator(0))
    expected = ab_lower_cs(expected_records, config)
    from_file = read_bounds(bounds, "csv")
    assert np.array_equal(from_file.lower, expected.lower)
    assert np.array_equal(from_file.estimate, expected.estimate)


def test_abtest_weak_null_decision_matches_library(tmp_path):
    values, x, arms = _ab_inputs(tmp_path)
    records = tmp_path / "ab.csv"
    path = tmp_path / "d.csv"
    assert main(["privatize", str(values), "--epsilon", "2", "--seed", "3",
                 "--output", str(records)]) == 0
    assert main(["abtest", str(records), "--method", "weak-null", "--epsilon", "2",
                 "--output", str(path)]) == 0
    config = ABConfig(pi=0.5, mechanism=PrivacyParams(r=r_of(2.0, 1), G=1), alpha=0.05)
    expected_records = privatize_pseudo_outcomes(x, arms, config, RandomSource(3).generator(0))
    expected = weak_null_eprocess(expected_records, config).decision(0.05)
    assert read_decision(path, "csv") == expected


def _write_sim_config(path, body):
    path.write_text(body)
    return str(path)


def test_simulate_matches_run_experiment(tmp_path, capsys):
    config_path = _write_sim_config(tmp_path / "sim.toml", """
[experiment]
law = "bernoulli"
bernoulli_p = 0.6
method = "nprr-hoeffding-ci"
horizon = 300
replications = 4
""")
    out = tmp_path / "table.csv"
    assert main(["simulate", config_path, "--seed", "11", "--alpha", "0.1",
                 "--epsilon", "2", "--output", str(out)]) == 0
    expected = run_experiment(ExperimentConfig(
        law="bernoulli", bernoulli_p=0.6, method="nprr-hoeffding-ci",
        horizon=300, replications=4, seed=11, alpha=0.1, epsilon=2.0,
    ))
    assert read_table(out, "csv") == expected


def test_simulate_file_values_override_shared_flags(tmp_path):
    config_path = _write_sim_config(tmp_path / "sim.toml", """
[experiment]
law = "uniform"
method = "nprr-mixture-two-sided"
horizon = 50
seed = 4
alpha = 0.2
""")
    out = tmp_path / "table.csv"
    assert main(["simulate", config_path, "--seed", "99", "--alpha", "0.01",
                 "--output", str(out)]) == 0
    expected = run_experiment(ExperimentConfig(
        law="uniform", method="nprr-mixture-two-sided", horizon=50,
        seed=4, alpha=0.2, epsilon=2.0,
    ))
    assert read_table(out, "csv") == expected


def test_simulate_rejects_unknown_keys(tmp_path, capsys):
    config_path = _write_sim_config(tmp_path / "sim.toml", """
[experiment]
law = "uniform"
horizont = 50
""")
    assert main(["simulate", config_path]) == 1
    assert "horizont" in capsys.readouterr().err


def test_simulate_requires_experiment_table(tmp_path, capsys):
    config_path = _write_sim_config(tmp_path / "sim.toml", "[settings]\nlaw = 'uniform'\n")
    assert main(["simulate", config_path]) == 1
    assert "experiment" in capsys.readouterr().err


def test_simulate_rejects_invalid_toml(tmp_path, capsys):
    config_path = _write_sim_config(tmp_path / "sim.toml", "[experiment\nlaw =\n")
    assert main(["simulate", config_path]) == 1
    assert "TOML" in capsys.readouterr().err


def test_unknown_method_is_an_input_error(record_file, capsys):
    assert main(["cs", str(record_file), "--method", "bogus"]) == 1
    assert "bogus" in capsys.readouterr().err


def test_missing_input_is_an_input_error(tmp_path, capsys):
    assert main(["ci", str(tmp_path / "absent.csv")]) == 1
    assert capsys.readouterr().err


def test_mismatched_channel_is_an_input_error(tmp_path, values_file, capsys):
    records = tmp_path / "noise.csv"
    assert main(["privatize", str(values_file), "--mechanism", "laplace",
                 "--output", str(records)]) == 0
    assert main(["cs", str(records), "--method", "nprr-hoeffding"]) == 1
    assert capsys.readouterr().err


def test_failed_output_write_leaves_no_file(tmp_path, record_file, capsys):
    target = tmp_path / "no_such_dir" / "bounds.csv"
    assert main(["cs", str(record_file), "--output", str(target)]) == 1
    assert not target.exists()
    assert not target.parent.exists()


def test_internal_errors_exit_with_code_two(monkeypatch, capsys):
    def boom(epsilon, objective="entropy"):
        raise RuntimeError("solver fell over")

    monkeypatch.setattr(cli_module, "tune_rg", boom)
    assert main(["tune", "--epsilon", "2"]) == 2
    assert "internal error" in capsys.readouterr().err


def test_console_script_runs():
    result = subprocess.run(
        ["privseq", "tune", "--epsilon", "2"], capture_output=True, text=True
    )
    assert result.returncode == 0
    assert result.stdout.startswith("r,G,epsilon")
