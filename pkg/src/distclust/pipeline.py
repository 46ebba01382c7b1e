"""End-to-end clustering runs and the benchmark harness.

A pipeline run takes sample groups, fits one Gaussian per group, and applies
one of six algorithms:

* ``kmeans_means``: k-means on the fitted mean vectors (covariances ignored)
* ``spectral_means``: spectral clustering on Euclidean mean distances
* ``wasserstein_spectral``: spectral clustering on squared 2-Wasserstein
* ``bhattacharyya_spectral``: spectral clustering on Bhattacharyya
* ``kl``: KL k-means with uniform random seeding
* ``klpp``: KL k-means with ++-style seeding

The first two are mean-only baselines; the rest use full distributions.

Benchmarks aggregate agreement with ground truth (NMI) over repeated trials.
Trial seeds are derived from the base seed with a fixed mixing function, so
reports are reproducible and independent of how trials are scheduled; with
``threads > 1`` trials run in worker processes.
"""

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from multiprocessing import get_context

import numpy as np

from .errors import InvalidConfig
from .evaluation import nmi
from .gaussian import estimate_gaussian
from .ingest import add_noise
from .klcluster import SEEDING_KLPP, SEEDING_RANDOM, kl_cluster
from .metrics import (
    METRIC_BHATTACHARYYA,
    METRIC_WASSERSTEIN_SQ,
    distance_matrix,
    mean_euclidean_matrix,
)
from .spectral import ClusterAssignment, kernelize, kmeans, spectral_cluster
from .synthgen import derive_trial_seed, generate_benchmark

ALGO_KMEANS_MEANS = "kmeans_means"
ALGO_SPECTRAL_MEANS = "spectral_means"
ALGO_WASSERSTEIN = "wasserstein_spectral"
ALGO_BHATTACHARYYA = "bhattacharyya_spectral"
ALGO_KL = "kl"
ALGO_KLPP = "klpp"

ALGORITHMS = (
    ALGO_KMEANS_MEANS,
    ALGO_SPECTRAL_MEANS,
    ALGO_WASSERSTEIN,
    ALGO_BHATTACHARYYA,
    ALGO_KL,
    ALGO_KLPP,
)

FAMILY_MEAN_ONLY = "mean_only"
FAMILY_DISTRIBUTION = "distribution_based"

_SPECTRAL_ALGOS = frozenset({ALGO_SPECTRAL_MEANS, ALGO_WASSERSTEIN, ALGO_BHATTACHARYYA})
_KL_ALGOS = frozenset({ALGO_KL, ALGO_KLPP})

REPORT_SCHEMA_VERSION = 1

THREADS_ENV_VAR = "DISTCLUST_THREADS"


def algorithm_family(algorithm: str) -> str:
    if algorithm in (ALGO_KMEANS_MEANS, ALGO_SPECTRAL_MEANS):
        return FAMILY_MEAN_ONLY
    return FAMILY_DISTRIBUTION


@dataclass(frozen=True)
class PipelineConfig:
    """One clustering run: the algorithm, k, and its knobs."""

    algorithm: str
    k: int
    sigma: float | None = None
    eps_scale: float = 1e-8
    seed: int = 0
    max_iter: int | None = None
    restarts: int = 10
    kernel_on_sqrt: bool = False
    klpp_squared: bool = False

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise InvalidConfig(f"unknown algorithm {self.algorithm!r}")
        if self.k < 2:
            raise InvalidConfig(f"k must be at least 2, got {self.k}")
        if self.sigma is not None and not self.sigma > 0:
            raise InvalidConfig(f"sigma must be positive, got {self.sigma}")
        if self.eps_scale < 0:
            raise InvalidConfig(f"eps_scale must be non-negative, got {self.eps_scale}")
        if self.seed < 0:
            raise InvalidConfig(f"seed must be non-negative, got {self.seed}")
        if self.max_iter is not None and self.max_iter < 1:
            raise InvalidConfig(f"max_iter must be positive, got {self.max_iter}")
        if self.restarts < 1:
            raise InvalidConfig(f"restarts must be positive, got {self.restarts}")


@dataclass(frozen=True, eq=False)
class PipelineResult:
    assignment: ClusterAssignment
    models: tuple
    algorithm: str
    diagnostics: dict = field(default_factory=dict)
    warnings: tuple[str, ...] = ()


def _config_warnings(config: PipelineConfig) -> tuple[str, ...]:
    notes = []
    if config.sigma is not None and config.algorithm not in _SPECTRAL_ALGOS:
        notes.append(f"sigma ignored for {config.algorithm}")
    if config.kernel_on_sqrt and config.algorithm not in _SPECTRAL_ALGOS:
        notes.append(f"kernel_on_sqrt ignored for {config.algorithm}")
    if config.klpp_squared and config.algorithm != ALGO_KLPP:
        notes.append(f"klpp_squared ignored for {config.algorithm}")
    return tuple(notes)


def run_pipeline(groups, config: PipelineConfig) -> PipelineResult:
    """Fit per-group Gaussians and cluster them with the configured algorithm."""
    if len(groups) < config.k:
        raise InvalidConfig(f"{len(groups)} groups cannot form k={config.k} clusters")
    models = tuple(estimate_gaussian(g, config.eps_scale) for g in groups)
    rng = np.random.default_rng(config.seed)
    warnings = _config_warnings(config)

    if config.algorithm == ALGO_KMEANS_MEANS:
        points = np.stack([m.mean for m in models])
        result = kmeans(
            points,
            config.k,
            rng,
            restarts=config.restarts,
            max_iter=config.max_iter or 300,
        )
        return PipelineResult(
            result.assignment,
            models,
            config.algorithm,
            diagnostics={"wcss": result.wcss},
            warnings=warnings,
        )

    if config.algorithm in _SPECTRAL_ALGOS:
        if config.algorithm == ALGO_SPECTRAL_MEANS:
            dm = mean_euclidean_matrix(models)
        elif config.algorithm == ALGO_WASSERSTEIN:
            dm = distance_matrix(models, METRIC_WASSERSTEIN_SQ)
        else:
            dm = distance_matrix(models, METRIC_BHATTACHARYYA)
        adjacency = kernelize(dm, sigma=config.sigma, on_sqrt=config.kernel_on_sqrt)
        result = spectral_cluster(
            adjacency,
            config.k,
            rng,
            restarts=config.restarts,
            max_iter=config.max_iter or 300,
        )
        return PipelineResult(
            result.assignment,
            models,
            config.algorithm,
            diagnostics={
                "metric": dm.metric,
                "bandwidth_sigma": result.bandwidth_sigma,
                "ncut": result.ncut,
            },
            warnings=warnings,
        )

    seeding = SEEDING_KLPP if config.algorithm == ALGO_KLPP else SEEDING_RANDOM
    result = kl_cluster(
        list(models),
        config.k,
        rng,
        seeding=seeding,
        max_iter=config.max_iter or 100,
        klpp_squared=config.klpp_squared,
    )
    return PipelineResult(
        result.assignment,
        models,
        config.algorithm,
        diagnostics={
            "iterations": result.iterations,
            "converged": result.converged,
            "objective": result.objective_history[-1],
            "repairs": len(result.repair_iterations),
        },
        warnings=warnings,
    )


def resolve_threads(explicit: int | None = None) -> int:
    """Worker count: explicit argument, else DISTCLUST_THREADS, else CPUs."""
    if explicit is not None:
        if explicit < 1:
            raise InvalidConfig(f"threads must be positive, got {explicit}")
        return explicit
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is not None:
        try:
            value = int(raw)
        except ValueError:
            raise InvalidConfig(
                f"{THREADS_ENV_VAR}={raw!r} is not an integer"
            ) from None
        if value < 1:
            raise InvalidConfig(f"{THREADS_ENV_VAR} must be positive, got {value}")
        return value
    return os.cpu_count() or 1


def _map_trials(fn, args_list, threads: int):
    if threads <= 1 or len(args_list) <= 1:
        return [fn(args) for args in args_list]
    with ProcessPoolExecutor(
        max_workers=min(threads, len(args_list)), mp_context=get_context("spawn")
    ) as pool:
        return list(pool.map(fn, args_list))


def _score_cell(scores: list[float]) -> dict:
    arr = np.asarray(scores, dtype=float)
    return {
        "trials": int(arr.size),
        "scores": [float(s) for s in arr],
        "mean_nmi": float(arr.mean()),
        "var_nmi": float(arr.var()),
    }


def _synth_trial(args: dict) -> dict[str, float]:
    bench = generate_benchmark(
        d=args["d"],
        k=args["k"],
        n_objects=args["n_objects"],
        samples_per_object=args["samples_per_object"],
        seed=args["trial_seed"],
        simplex_boundary=args["simplex_boundary"],
    )
    base = args["config"]
    scores = {}
    for algorithm in args["algorithms"]:
        config = replace(base, algorithm=algorithm, k=args["k"], seed=args["trial_seed"])
        result = run_pipeline(bench.groups, config)
        scores[algorithm] = nmi(bench.truth, result.assignment.labels)
    return scores


def benchmark_synthetic(
    d_list,
    k_list,
    trials: int,
    base_seed: int = 0,
    algorithms=ALGORITHMS,
    n_objects: int = 200,
    samples_per_object: int = 30,
    simplex_boundary: bool = False,
    config: PipelineConfig | None = None,
    threads: int | None = None,
) -> dict:
    """NMI of each algorithm against synthetic ground truth, per (d, k) cell.

    Every trial draws a fresh benchmark with seed ``derive_trial_seed(base_seed,
    t)`` and runs all algorithms on the same data; the same seed also drives
    each algorithm's internal randomness.
    """
    if trials < 1:
        raise InvalidConfig(f"trials must be positive, got {trials}")
    for algorithm in algorithms:
        if algorithm not in ALGORITHMS:
            raise InvalidConfig(f"unknown algorithm {algorithm!r}")
    base = config or PipelineConfig(algorithm=ALGORITHMS[0], k=2)
    workers = resolve_threads(threads)
    cells = []
    for d in d_list:
        for k in k_list:
            args_list = [
                {
                    "d": int(d),
                    "k": int(k),
                    "n_objects": n_objects,
                    "samples_per_object": samples_per_object,
                    "simplex_boundary": simplex_boundary,
                    "trial_seed": derive_trial_seed(base_seed, t),
                    "algorithms": tuple(algorithms),
                    "config": base,
                }
                for t in range(trials)
            ]
            started = time.perf_counter()
            per_trial = _map_trials(_synth_trial, args_list, workers)
            elapsed = time.perf_counter() - started
            for algorithm in algorithms:
                cell = {
                    "d": int(d),
                    "k": int(k),
                    "algorithm": algorithm,
                    "family": algorithm_family(algorithm),
                }
                cell.update(_score_cell([t[algorithm] for t in per_trial]))
                cell["wall_time_s"] = elapsed / len(algorithms)
                cells.append(cell)
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "kind": "synthetic",
        "created_at": datetime.now(timezone.utc).isoformat(),
        "params": {
            "d_list": [int(d) for d in d_list],
            "k_list": [int(k) for k in k_list],
            "trials": trials,
            "base_seed": base_seed,
            "n_objects": n_objects,
            "samples_per_object": samples_per_object,
            "simplex_boundary": simplex_boundary,
            "algorithms": list(algorithms),
        },
        "cells": cells,
    }


def _stock_trial(args: dict) -> dict[str, float]:
    rng = np.random.default_rng(args["noise_seed"])
    noised = add_noise(args["groups"], args["noise_sigma"], rng)
    base = args["config"]
    scores = {}
    for algorithm in args["algorithms"]:
        config = replace(
            base, algorithm=algorithm, k=args["k"], seed=args["cluster_seed"]
        )
        result = run_pipeline(noised, config)
        scores[algorithm] = nmi(
            np.asarray(args["clean_labels"][algorithm]), result.assignment.labels
        )
    return scores


def benchmark_stock(
    groups,
    k_list,
    noise_sigmas,
    trials: int,
    base_seed: int = 0,
    algorithms=ALGORITHMS,
    config: PipelineConfig | None = None,
    threads: int | None = None,
) -> dict:
    """Noise-stability benchmark on real groups with no external truth.

    Each algorithm's labels on the clean data serve as its own reference;
    trials perturb every sample with iid N(0, sigma^2) and measure NMI
    against that reference. Clustering seeds are held fixed at
    ``base_seed``, so sigma = 0 reproduces the reference exactly.
    """
    if trials < 1:
        raise InvalidConfig(f"trials must be positive, got {trials}")
    for sigma in noise_sigmas:
        if sigma < 0:
            raise InvalidConfig(f"noise sigma must be non-negative, got {sigma}")
    for algorithm in algorithms:
        if algorithm not in ALGORITHMS:
            raise InvalidConfig(f"unknown algorithm {algorithm!r}")
    base = config or PipelineConfig(algorithm=ALGORITHMS[0], k=2)
    workers = resolve_threads(threads)
    cells = []
    for k in k_list:
        clean_labels = {}
        for algorithm in algorithms:
            clean = run_pipeline(
                groups, replace(base, algorithm=algorithm, k=int(k), seed=base_seed)
            )
            clean_labels[algorithm] = [int(v) for v in clean.assignment.labels]
        for s_idx, noise_sigma in enumerate(noise_sigmas):
            args_list = [
                {
                    "groups": groups,
                    "k": int(k),
                    "noise_sigma": float(noise_sigma),
                    "noise_seed": derive_trial_seed(
                        base_seed, 1 + s_idx * trials + t
                    ),
                    "cluster_seed": base_seed,
                    "algorithms": tuple(algorithms),
                    "clean_labels": clean_labels,
                    "config": base,
                }
                for t in range(trials)
            ]
            started = time.perf_counter()
            per_trial = _map_trials(_stock_trial, args_list, workers)
            elapsed = time.perf_counter() - started
            for algorithm in algorithms:
                cell = {
                    "k": int(k),
                    "noise_sigma": float(noise_sigma),
                    "algorithm": algorithm,
                    "family": algorithm_family(algorithm),
                }
                cell.update(_score_cell([t[algorithm] for t in per_trial]))
                cell["wall_time_s"] = elapsed / len(algorithms)
                cells.append(cell)
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "kind": "stock",
        "created_at": datetime.now(timezone.utc).isoformat(),
        "params": {
            "n_groups": len(groups),
            "k_list": [int(k) for k in k_list],
            "noise_sigmas": [float(s) for s in noise_sigmas],
            "trials": trials,
            "base_seed": base_seed,
            "algorithms": list(algorithms),
        },
        "cells": cells,
    }


def write_report(report: dict, out_dir) -> tuple[str, str]:
    """Write report.json plus a flat summary.csv into out_dir."""
    import csv
    import json
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    json_path = out / "report.json"
    json_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")

    key_fields = (
        ["d", "k"] if report["kind"] == "synthetic" else ["k", "noise_sigma"]
    )
    columns = key_fields + ["algorithm", "family", "trials", "mean_nmi", "var_nmi"]
    csv_path = out / "summary.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for cell in report["cells"]:
            writer.writerow([cell[c] for c in columns])
    return str(json_path), str(csv_path)
