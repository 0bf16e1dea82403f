"""Experiment harness: manifests, seed batteries, ablation and sensitivity sweeps.

Result tables are plain CSV with fixed 6-decimal formatting so that equal
configurations produce byte-identical files; wall-clock timings go to a
separate file for that reason. Aggregate statistics are computed from the
rounded per-seed values, which makes them exactly recomputable from the
emitted per-seed table.
"""

from __future__ import annotations

import csv
import logging
import statistics
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from . import __version__
from .data import (
    DataError,
    Dataset,
    SyntheticSpec,
    generate_synthetic,
    load_csv,
    prepare,
    subsample_raw,
)
from .evolution import EvolutionConfig, RunResult, run
from .infotheory import GainRatioMatrix, build_omega, load_omega, save_omega

log = logging.getLogger("chainga")

METRIC_FIELDS = ("accuracy", "precision", "recall", "f1_score", "feature_ratio", "fitness")
AGGREGATE_STATS = ("median", "mean", "min", "max")

# flag order: multi_pop, elite_interaction, diversity_crossover, diversity_mutation
ABLATION_ROWS = (
    (False, False, False, False),
    (True, False, False, False),
    (True, True, False, False),
    (True, True, True, False),
    (True, True, False, True),
    (True, True, True, True),
)
FLAG_FIELDS = ("m_pop", "e_iter", "d_cro", "d_mut")
CHECK, CROSS = "✓", "×"


class ConfigError(Exception):
    """Raised for invalid run configurations or manifests."""


@dataclass
class HarnessConfig:
    manifest: dict
    manifest_dir: Path
    evolution: dict = field(default_factory=dict)
    seeds: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 5])
    bins: int = 10
    subsample: int | None = None
    split_seed: int = 0
    threads: int = 1
    omega_cache: Path | None = None

    def evolution_config(self, seed: int, **overrides) -> EvolutionConfig:
        kwargs = dict(self.evolution)
        kwargs.update(overrides)
        try:
            return EvolutionConfig(seed=seed, **kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid evolution config: {exc}") from exc


def _load_yaml(path: Path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            content = yaml.safe_load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(content, dict):
        raise ConfigError(f"{path} must contain a mapping")
    return content


def load_run_config(path, **overrides) -> HarnessConfig:
    """Read a YAML run config; keyword overrides win over file values.

    A bare dataset manifest (a mapping with a 'type' key) is accepted too
    and paired with default evolution settings.
    """
    path = Path(path)
    raw = _load_yaml(path)
    dataset_ref = raw.get("dataset")
    if dataset_ref is None and "type" in raw:
        dataset_ref, raw = dict(raw), {}
    if dataset_ref is None:
        raise ConfigError(f"{path}: missing 'dataset' entry")
    if isinstance(dataset_ref, str):
        manifest_path = (path.parent / dataset_ref).resolve()
        manifest = _load_yaml(manifest_path)
        manifest_dir = manifest_path.parent
    elif isinstance(dataset_ref, dict):
        manifest = dataset_ref
        manifest_dir = path.parent
    else:
        raise ConfigError(f"{path}: 'dataset' must be a path or inline mapping")

    cache = raw.get("omega_cache")
    seeds = raw.get("seeds")
    cfg = HarnessConfig(
        manifest=manifest,
        manifest_dir=manifest_dir,
        evolution=dict(raw.get("evolution") or {}),
        seeds=[1, 2, 3, 4, 5] if seeds is None else list(seeds),
        bins=int(raw.get("bins", manifest.get("bins", 10))),
        subsample=raw.get("subsample"),
        split_seed=int(raw.get("split_seed", 0)),
        threads=int(raw.get("threads", 1)),
        omega_cache=(path.parent / cache) if cache else None,
    )
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    if not cfg.seeds:
        raise ConfigError("seed list must not be empty")
    return cfg


def build_dataset(cfg: HarnessConfig) -> Dataset:
    """Materialize the dataset a manifest describes (CSV or synthetic)."""
    manifest = cfg.manifest
    kind = manifest.get("type", "csv")
    if kind == "synthetic":
        try:
            spec = SyntheticSpec(
                n_rows=int(manifest["rows"]),
                n_informative=int(manifest["informative"]),
                n_redundant=int(manifest.get("redundant", 0)),
                n_noise=int(manifest.get("noise", 0)),
                n_classes=int(manifest.get("classes", 2)),
                seed=int(manifest.get("seed", 0)),
            )
        except KeyError as exc:
            raise ConfigError(f"synthetic manifest missing field {exc}") from exc
        return generate_synthetic(spec, bins=cfg.bins)
    if kind == "csv":
        try:
            csv_path = cfg.manifest_dir / manifest["path"]
            label_column = manifest["label_column"]
        except KeyError as exc:
            raise ConfigError(f"csv manifest missing field {exc}") from exc
        raw = load_csv(csv_path, label_column, header=bool(manifest.get("header", True)))
        if cfg.subsample:
            raw = subsample_raw(raw, int(cfg.subsample), cfg.split_seed)
        return prepare(raw, bins=cfg.bins, split_seed=cfg.split_seed)
    raise ConfigError(f"unknown dataset manifest type {kind!r}")


def obtain_omega(dataset: Dataset, cache_path: Path | None) -> tuple[GainRatioMatrix, str]:
    """Compute the gain-ratio matrix, or reuse a dump whose key matches the
    dataset digest. Returns (matrix, cache status)."""
    if cache_path is None:
        return build_omega(dataset), "disabled"
    cache_path = Path(cache_path)
    digest = dataset.digest()
    if cache_path.exists():
        omega, key = load_omega(cache_path)
        if key == digest and omega.d == dataset.d:
            log.info("omega cache hit (%s)", cache_path)
            return omega, "hit"
        log.info("omega cache key mismatch; recomputing")
        omega = build_omega(dataset)
        save_omega(cache_path, omega, digest)
        return omega, "mismatch-recomputed"
    omega = build_omega(dataset)
    cache_path.parent.mkdir(parents=True, exist_ok=True)
    save_omega(cache_path, omega, digest)
    log.info("omega cache created (%s)", cache_path)
    return omega, "miss-created"


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _round6(x: float) -> float:
    return float(_fmt(x))


def result_row(result: RunResult) -> dict:
    return {
        "seed": result.seed,
        "accuracy": _round6(result.metrics.accuracy),
        "precision": _round6(result.metrics.precision),
        "recall": _round6(result.metrics.recall),
        "f1_score": _round6(result.metrics.f1),
        "feature_ratio": _round6(result.feature_ratio),
        "fitness": _round6(result.best_fitness.fitness),
        "n_selected": result.best_fitness.n_selected,
        "mask": "".join("1" if b else "0" for b in result.best_mask),
    }


def aggregate_rows(rows: list[dict]) -> list[dict]:
    out = []
    for stat in AGGREGATE_STATS:
        fn = {
            "median": statistics.median,
            "mean": statistics.fmean,
            "min": min,
            "max": max,
        }[stat]
        entry = {"stat": stat}
        for metric in METRIC_FIELDS:
            entry[metric] = _round6(fn([row[metric] for row in rows]))
        out.append(entry)
    return out


def write_table(path: Path, fieldnames: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(v) if isinstance(v, float) else v for k, v in row.items()})


def read_table(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _trace_rows(results: list[RunResult]) -> list[dict]:
    rows = []
    for result in results:
        for entry in result.trace:
            rows.append(
                {
                    "seed": result.seed,
                    "generation": entry.generation,
                    "subpop": entry.subpop,
                    "size": entry.size,
                    "best_fitness": _round6(entry.best_fitness),
                    "mean_fitness": _round6(entry.mean_fitness),
                    "best_n_selected": entry.best_n_selected,
                }
            )
    return rows


def run_battery(
    cfg: HarnessConfig, dataset: Dataset, omega: GainRatioMatrix, **flag_overrides
) -> list[RunResult]:
    results = []
    for seed in cfg.seeds:
        config = cfg.evolution_config(seed, **flag_overrides)
        results.append(run(dataset, config, omega=omega, threads=cfg.threads))
        log.info(
            "seed %s done: fitness=%.6f acc=%.6f selected=%d/%d",
            seed,
            results[-1].best_fitness.fitness,
            results[-1].metrics.accuracy,
            results[-1].best_fitness.n_selected,
            dataset.d,
        )
    return results


def _write_run_manifest(out_dir: Path, cfg: HarnessConfig, dataset: Dataset, extra: dict) -> None:
    manifest = {
        "tool": {"name": "chainga", "version": __version__},
        "dataset": {
            "manifest": cfg.manifest,
            "digest": dataset.digest(),
            "rows": dataset.n_rows,
            "features": dataset.d,
            "classes": dataset.n_classes,
            "bins": cfg.bins,
            "split_seed": cfg.split_seed,
            "subsample": cfg.subsample,
        },
        "evolution": cfg.evolution,
        "seeds": cfg.seeds,
        "threads": cfg.threads,
    }
    manifest.update(extra)
    with open(out_dir / "run_manifest.yaml", "w", encoding="utf-8") as fh:
        yaml.safe_dump(manifest, fh, sort_keys=True)


def _write_timings(out_dir: Path, results: list[RunResult]) -> None:
    rows = [
        {"seed": r.seed, "wall_time_s": f"{r.wall_time_s:.3f}", "classifier_evals": r.n_classifier_evals}
        for r in results
    ]
    write_table(out_dir / "timings.csv", ["seed", "wall_time_s", "classifier_evals"], rows)


PER_SEED_FIELDS = ["seed", *METRIC_FIELDS, "n_selected", "mask"]


def cmd_run(cfg: HarnessConfig, out_dir) -> list[RunResult]:
    """One battery with the configured flags; writes per-seed and aggregate
    tables plus the trace and the run manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset = build_dataset(cfg)
    omega, cache_status = obtain_omega(dataset, cfg.omega_cache)
    results = run_battery(cfg, dataset, omega)
    rows = [result_row(r) for r in results]
    write_table(out_dir / "per_seed.csv", PER_SEED_FIELDS, rows)
    write_table(out_dir / "aggregate.csv", ["stat", *METRIC_FIELDS], aggregate_rows(rows))
    write_table(
        out_dir / "trace.csv",
        ["seed", "generation", "subpop", "size", "best_fitness", "mean_fitness", "best_n_selected"],
        _trace_rows(results),
    )
    _write_timings(out_dir, results)
    _write_run_manifest(out_dir, cfg, dataset, {"command": "run", "omega_cache": cache_status})
    return results


def _flag_cells(flags: tuple[bool, bool, bool, bool]) -> dict:
    return {name: (CHECK if on else CROSS) for name, on in zip(FLAG_FIELDS, flags)}


def cmd_ablation(cfg: HarnessConfig, out_dir) -> list[dict]:
    """Six-row ablation over the operator flags, medians across seeds."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset = build_dataset(cfg)
    omega, cache_status = obtain_omega(dataset, cfg.omega_cache)

    table = []
    detail = []
    for flags in ABLATION_ROWS:
        overrides = dict(zip(
            ("multi_pop", "elite_interaction", "diversity_crossover", "diversity_mutation"), flags
        ))
        results = run_battery(cfg, dataset, omega, **overrides)
        rows = [result_row(r) for r in results]
        medians = aggregate_rows(rows)[0]
        entry = _flag_cells(flags)
        for metric in METRIC_FIELDS:
            entry[metric] = medians[metric]
        table.append(entry)
        for row in rows:
            detail.append({**_flag_cells(flags), **row})

    write_table(out_dir / "ablation.csv", [*FLAG_FIELDS, *METRIC_FIELDS], table)
    write_table(out_dir / "ablation_per_seed.csv", [*FLAG_FIELDS, *PER_SEED_FIELDS], detail)
    _write_run_manifest(
        out_dir, cfg, dataset, {"command": "ablation", "omega_cache": cache_status}
    )
    return table


def cmd_sensitivity(cfg: HarnessConfig, parameter: str, values: list[int], out_dir) -> list[dict]:
    """Sweep subpopulation count M or elite count S, one aggregate row per
    value; the non-swept parameter keeps its configured default."""
    out_dir = Path(out_dir)
    parameter = parameter.upper()
    if parameter not in ("M", "S"):
        raise ConfigError(f"sensitivity parameter must be 'M' or 'S', got {parameter!r}")
    if not values:
        raise ConfigError("sensitivity sweep needs at least one value")

    out_dir.mkdir(parents=True, exist_ok=True)
    dataset = build_dataset(cfg)
    omega, cache_status = obtain_omega(dataset, cfg.omega_cache)

    # validate the whole sweep before burning any compute
    sweeps = []
    for value in values:
        key = "subpopulations" if parameter == "M" else "elites"
        sweeps.append((value, {key: int(value)}))
        cfg.evolution_config(0, **sweeps[-1][1])

    table = []
    for value, overrides in sweeps:
        results = run_battery(cfg, dataset, omega, **overrides)
        rows = [result_row(r) for r in results]
        medians = aggregate_rows(rows)[0]
        entry = {"parameter": parameter, "value": value}
        for metric in METRIC_FIELDS:
            entry[metric] = medians[metric]
        table.append(entry)

    write_table(out_dir / "sensitivity.csv", ["parameter", "value", *METRIC_FIELDS], table)
    _write_run_manifest(
        out_dir, cfg, dataset,
        {"command": "sensitivity", "parameter": parameter, "values": list(values),
         "omega_cache": cache_status},
    )
    return table


def cmd_omega_dump(cfg: HarnessConfig, out_path) -> str:
    """Precompute the gain-ratio matrix and dump it keyed by dataset digest."""
    dataset = build_dataset(cfg)
    omega = build_omega(dataset)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    digest = dataset.digest()
    save_omega(out_path, omega, digest)
    log.info("omega dumped to %s (key=%s)", out_path, digest[:12])
    return digest
