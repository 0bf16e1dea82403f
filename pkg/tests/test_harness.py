import numpy as np
import pytest
import yaml

from chainga import cli
from chainga.harness import (
    ConfigError,
    aggregate_rows,
    cmd_ablation,
    cmd_omega_dump,
    cmd_run,
    cmd_sensitivity,
    load_run_config,
    read_table,
)

EVOLUTION = {
    "population_size": 6,
    "subpopulations": 3,
    "elites": 1,
    "generations": 2,
    "mutation_prob": 0.2,
    "alpha": 0.01,
    "knn_k": 3,
}

MANIFEST = {
    "type": "synthetic",
    "rows": 90,
    "informative": 2,
    "redundant": 1,
    "noise": 3,
    "classes": 2,
    "seed": 5,
}


def write_configs(tmp_path, seeds=(1, 2), evolution=None, manifest=None, extra=None):
    tmp_path.mkdir(parents=True, exist_ok=True)
    manifest_path = tmp_path / "dataset.yaml"
    manifest_path.write_text(yaml.safe_dump(manifest or MANIFEST), encoding="utf-8")
    config = {
        "dataset": "dataset.yaml",
        "seeds": list(seeds),
        "bins": 6,
        "evolution": dict(evolution or EVOLUTION),
    }
    config.update(extra or {})
    config_path = tmp_path / "run.yaml"
    config_path.write_text(yaml.safe_dump(config), encoding="utf-8")
    return config_path


def test_cmd_run_writes_tables_with_metric_layout(tmp_path):
    cfg = load_run_config(write_configs(tmp_path))
    out = tmp_path / "out"
    cmd_run(cfg, out)
    for name in ("per_seed.csv", "aggregate.csv", "trace.csv", "timings.csv", "run_manifest.yaml"):
        assert (out / name).exists()
    rows = read_table(out / "per_seed.csv")
    assert len(rows) == 2
    header = list(rows[0])
    assert header[:7] == [
        "seed", "accuracy", "precision", "recall", "f1_score", "feature_ratio", "fitness",
    ]
    for row in rows:
        assert len(row["mask"]) == 6  # one bit per feature
        assert row["mask"].count("1") == int(row["n_selected"])


def test_cmd_run_byte_identical_reruns(tmp_path):
    config_path = write_configs(tmp_path)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    cmd_run(load_run_config(config_path), out1)
    cmd_run(load_run_config(config_path), out2)
    for name in ("per_seed.csv", "aggregate.csv", "trace.csv", "run_manifest.yaml"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_cmd_run_aggregate_recomputable(tmp_path):
    cfg = load_run_config(write_configs(tmp_path, seeds=(1, 2, 3)))
    out = tmp_path / "out"
    cmd_run(cfg, out)
    per_seed = read_table(out / "per_seed.csv")
    parsed = [
        {key: float(row[key]) for key in
         ("accuracy", "precision", "recall", "f1_score", "feature_ratio", "fitness")}
        for row in per_seed
    ]
    expected = aggregate_rows(parsed)
    actual = read_table(out / "aggregate.csv")
    assert len(actual) == 4
    for exp, act in zip(expected, actual):
        assert act["stat"] == exp["stat"]
        for key, value in exp.items():
            if key != "stat":
                assert act[key] == f"{value:.6f}"


def test_tables_round_trip_through_reader(tmp_path):
    cfg = load_run_config(write_configs(tmp_path))
    out = tmp_path / "out"
    cmd_run(cfg, out)
    for name in ("per_seed.csv", "aggregate.csv", "trace.csv"):
        rows = read_table(out / name)
        assert rows and all(None not in row.values() for row in rows)


def test_cli_run_exit_codes(tmp_path):
    config_path = write_configs(tmp_path)
    assert cli.main(["run", "--config", str(config_path), "--out", str(tmp_path / "ok")]) == 0
    bad_evo = dict(EVOLUTION, subpopulations=4, population_size=30)
    bad_path = write_configs(tmp_path / "bad", evolution=bad_evo)
    assert cli.main(["run", "--config", str(bad_path), "--out", str(tmp_path / "bad_out")]) == 1


def test_cli_missing_config_is_config_error(tmp_path):
    assert cli.main(["run", "--config", str(tmp_path / "nope.yaml"), "--out", str(tmp_path)]) == 1


def test_cli_missing_csv_is_data_error(tmp_path):
    manifest = {"type": "csv", "path": "absent.csv", "label_column": "class"}
    config_path = write_configs(tmp_path, manifest=manifest)
    assert cli.main(["run", "--config", str(config_path), "--out", str(tmp_path / "out")]) == 2


def test_cli_flag_overrides(tmp_path):
    config_path = write_configs(tmp_path)
    out = tmp_path / "out"
    code = cli.main(
        ["run", "--config", str(config_path), "--out", str(out), "--seeds", "7", "--pm", "0.0"]
    )
    assert code == 0
    rows = read_table(out / "per_seed.csv")
    assert [row["seed"] for row in rows] == ["7"]


def test_ablation_six_rows_and_all_on_matches_run(tmp_path):
    config_path = write_configs(tmp_path, seeds=(1, 2))
    out_ab = tmp_path / "ablation"
    out_run = tmp_path / "run_out"
    cmd_ablation(load_run_config(config_path), out_ab)
    cmd_run(load_run_config(config_path), out_run)

    rows = read_table(out_ab / "ablation.csv")
    assert len(rows) == 6
    flags = [tuple(row[f] for f in ("m_pop", "e_iter", "d_cro", "d_mut")) for row in rows]
    assert flags[0] == ("×",) * 4
    assert flags[-1] == ("✓",) * 4
    assert flags[1] == ("✓", "×", "×", "×")
    assert flags[2] == ("✓", "✓", "×", "×")
    assert flags[3] == ("✓", "✓", "✓", "×")
    assert flags[4] == ("✓", "✓", "×", "✓")

    median = read_table(out_run / "aggregate.csv")[0]
    assert median["stat"] == "median"
    for metric in ("accuracy", "precision", "recall", "f1_score", "feature_ratio", "fitness"):
        assert rows[-1][metric] == median[metric]


def test_ablation_all_off_equals_flags_off_run(tmp_path):
    config_path = write_configs(tmp_path, seeds=(1, 2))
    out_ab = tmp_path / "ablation"
    cmd_ablation(load_run_config(config_path), out_ab)
    flags_off = {
        "multi_pop": False,
        "elite_interaction": False,
        "diversity_crossover": False,
        "diversity_mutation": False,
    }
    off_path = write_configs(tmp_path / "off", evolution={**EVOLUTION, **flags_off})
    out_off = tmp_path / "off_out"
    cmd_run(load_run_config(off_path), out_off)
    all_off = read_table(out_ab / "ablation.csv")[0]
    median = read_table(out_off / "aggregate.csv")[0]
    for metric in ("accuracy", "precision", "recall", "f1_score", "feature_ratio", "fitness"):
        assert all_off[metric] == median[metric]


def test_sensitivity_m_sweep(tmp_path):
    config_path = write_configs(tmp_path, evolution=dict(EVOLUTION, population_size=12))
    out = tmp_path / "sens"
    table = cmd_sensitivity(load_run_config(config_path), "M", [1, 3, 4, 6], out)
    assert len(table) == 4
    rows = read_table(out / "sensitivity.csv")
    assert [row["value"] for row in rows] == ["1", "3", "4", "6"]


def test_sensitivity_rejects_non_divisor(tmp_path):
    config_path = write_configs(tmp_path, evolution=dict(EVOLUTION, population_size=30))
    with pytest.raises(ConfigError, match="divide"):
        cmd_sensitivity(load_run_config(config_path), "M", [1, 3, 4], tmp_path / "x")
    code = cli.main(
        ["sensitivity", "--config", str(config_path), "--out", str(tmp_path / "y"),
         "--parameter", "M", "--values", "4"]
    )
    assert code == 1


def test_sensitivity_s_sweep(tmp_path):
    config_path = write_configs(
        tmp_path, evolution=dict(EVOLUTION, population_size=12, subpopulations=2)
    )
    rows = cmd_sensitivity(load_run_config(config_path), "S", [2, 3, 5], tmp_path / "sens")
    assert [row["value"] for row in rows] == [2, 3, 5]


def test_sensitivity_single_value_matches_run(tmp_path):
    config_path = write_configs(tmp_path)
    out_run = tmp_path / "run_out"
    cmd_run(load_run_config(config_path), out_run)
    rows = cmd_sensitivity(
        load_run_config(config_path), "M", [EVOLUTION["subpopulations"]], tmp_path / "sens"
    )
    median = read_table(out_run / "aggregate.csv")[0]
    for metric in ("accuracy", "precision", "recall", "f1_score", "feature_ratio", "fitness"):
        assert f"{rows[0][metric]:.6f}" == median[metric]


def test_omega_dump_then_run_hits_cache(tmp_path, caplog):
    config_path = write_configs(tmp_path)
    cache = tmp_path / "omega.bin"
    assert cli.main(["omega-dump", "--config", str(config_path), "--out", str(cache)]) == 0
    cfg = load_run_config(config_path, omega_cache=cache)
    import logging

    with caplog.at_level(logging.INFO, logger="chainga"):
        cmd_run(cfg, tmp_path / "out")
    assert any("omega cache hit" in message for message in caplog.messages)
    manifest = yaml.safe_load((tmp_path / "out" / "run_manifest.yaml").read_text())
    assert manifest["omega_cache"] == "hit"


def test_omega_cache_mismatch_recomputes(tmp_path):
    config_path = write_configs(tmp_path)
    cache = tmp_path / "omega.bin"
    cmd_omega_dump(load_run_config(config_path), cache)
    changed = write_configs(tmp_path / "other", manifest=dict(MANIFEST, seed=6))
    cfg = load_run_config(changed, omega_cache=cache)
    cmd_run(cfg, tmp_path / "out")
    manifest = yaml.safe_load((tmp_path / "out" / "run_manifest.yaml").read_text())
    assert manifest["omega_cache"] == "mismatch-recomputed"


def test_omega_dump_twice_identical(tmp_path):
    config_path = write_configs(tmp_path)
    c1, c2 = tmp_path / "c1.bin", tmp_path / "c2.bin"
    cmd_omega_dump(load_run_config(config_path), c1)
    cmd_omega_dump(load_run_config(config_path), c2)
    assert c1.read_bytes() == c2.read_bytes()


def test_bare_manifest_accepted_as_config(tmp_path):
    manifest_path = tmp_path / "dataset.yaml"
    manifest_path.write_text(yaml.safe_dump(MANIFEST), encoding="utf-8")
    cfg = load_run_config(manifest_path)
    assert cfg.manifest["type"] == "synthetic"
    cmd_omega_dump(cfg, tmp_path / "omega.bin")
    assert (tmp_path / "omega.bin").exists()


def test_trace_rows_cover_all_generations(tmp_path):
    cfg = load_run_config(write_configs(tmp_path, seeds=(1,)))
    out = tmp_path / "out"
    cmd_run(cfg, out)
    trace = read_table(out / "trace.csv")
    generations = {row["generation"] for row in trace}
    assert generations == {"1", "2"}
    subpops = {row["subpop"] for row in trace}
    assert subpops == {"0", "1", "2"}
    assert all(row["size"] == "2" for row in trace)


def test_seed_list_must_not_be_empty(tmp_path):
    config_path = write_configs(tmp_path, seeds=())
    with pytest.raises(ConfigError, match="seed list"):
        load_run_config(config_path)
