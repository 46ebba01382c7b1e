import json

import numpy as np
import pytest

from distclust.errors import InvalidConfig
from distclust.pipeline import (
    ALGO_BHATTACHARYYA,
    ALGO_KL,
    ALGO_KLPP,
    ALGO_KMEANS_MEANS,
    ALGO_SPECTRAL_MEANS,
    ALGO_WASSERSTEIN,
    ALGORITHMS,
    FAMILY_DISTRIBUTION,
    FAMILY_MEAN_ONLY,
    PipelineConfig,
    algorithm_family,
    benchmark_stock,
    benchmark_synthetic,
    resolve_threads,
    run_pipeline,
    write_report,
)
from distclust.storage import canonical_json_bytes
from distclust.synthgen import generate_benchmark
from distclust.evaluation import nmi
from distclust.gaussian import SampleGroup

DISTRIBUTION_ALGOS = (ALGO_WASSERSTEIN, ALGO_BHATTACHARYYA, ALGO_KL, ALGO_KLPP)


def separated_groups(rng, per_cluster: int = 8, gap: float = 10.0):
    """Two far-apart families of sample groups plus truth labels."""
    groups = []
    truth = []
    for c in range(2):
        for i in range(per_cluster):
            center = np.array([c * gap, c * gap])
            scale = 1.0 + c  # the families also differ in spread
            samples = center + scale * rng.standard_normal((20, 2))
            groups.append(SampleGroup(f"g{c}_{i}", samples))
            truth.append(c)
    return groups, np.array(truth)


class TestPipelineConfig:
    def test_validation(self):
        with pytest.raises(InvalidConfig):
            PipelineConfig(algorithm="dbscan", k=2)
        with pytest.raises(InvalidConfig):
            PipelineConfig(algorithm=ALGO_KL, k=1)
        with pytest.raises(InvalidConfig):
            PipelineConfig(algorithm=ALGO_KL, k=2, sigma=0.0)
        with pytest.raises(InvalidConfig):
            PipelineConfig(algorithm=ALGO_KL, k=2, eps_scale=-1.0)
        with pytest.raises(InvalidConfig):
            PipelineConfig(algorithm=ALGO_KL, k=2, seed=-4)
        with pytest.raises(InvalidConfig):
            PipelineConfig(algorithm=ALGO_KL, k=2, max_iter=0)
        with pytest.raises(InvalidConfig):
            PipelineConfig(algorithm=ALGO_KL, k=2, restarts=0)

    def test_family_tags(self):
        assert algorithm_family(ALGO_KMEANS_MEANS) == FAMILY_MEAN_ONLY
        assert algorithm_family(ALGO_SPECTRAL_MEANS) == FAMILY_MEAN_ONLY
        for algo in DISTRIBUTION_ALGOS:
            assert algorithm_family(algo) == FAMILY_DISTRIBUTION


class TestRunPipeline:
    @pytest.mark.parametrize("algorithm", ALGORITHMS)
    def test_each_algorithm_runs_and_is_deterministic(self, algorithm, rng):
        groups, _ = separated_groups(rng, per_cluster=5)
        config = PipelineConfig(algorithm=algorithm, k=2, seed=3)
        a = run_pipeline(groups, config)
        b = run_pipeline(groups, config)
        assert a.assignment.n == len(groups)
        assert np.array_equal(a.assignment.labels, b.assignment.labels)
        assert a.algorithm == algorithm

    @pytest.mark.parametrize("algorithm", ALGORITHMS)
    def test_separated_families_recovered(self, algorithm, rng):
        groups, truth = separated_groups(rng)
        config = PipelineConfig(algorithm=algorithm, k=2, seed=1)
        result = run_pipeline(groups, config)
        assert nmi(truth, result.assignment.labels) == pytest.approx(1.0, abs=1e-9)

    def test_diagnostics_by_family(self, rng):
        groups, _ = separated_groups(rng, per_cluster=4)
        spectral = run_pipeline(groups, PipelineConfig(algorithm=ALGO_WASSERSTEIN, k=2))
        assert {"metric", "bandwidth_sigma", "ncut"} <= set(spectral.diagnostics)
        kl = run_pipeline(groups, PipelineConfig(algorithm=ALGO_KL, k=2))
        assert {"iterations", "converged", "objective"} <= set(kl.diagnostics)
        km = run_pipeline(groups, PipelineConfig(algorithm=ALGO_KMEANS_MEANS, k=2))
        assert "wcss" in km.diagnostics

    def test_option_warnings(self, rng):
        groups, _ = separated_groups(rng, per_cluster=4)
        result = run_pipeline(
            groups, PipelineConfig(algorithm=ALGO_KL, k=2, sigma=1.0)
        )
        assert any("sigma ignored for kl" in w for w in result.warnings)
        result = run_pipeline(
            groups,
            PipelineConfig(algorithm=ALGO_KMEANS_MEANS, k=2, kernel_on_sqrt=True),
        )
        assert any("kernel_on_sqrt ignored" in w for w in result.warnings)
        result = run_pipeline(
            groups, PipelineConfig(algorithm=ALGO_KL, k=2, klpp_squared=True)
        )
        assert any("klpp_squared ignored" in w for w in result.warnings)

    def test_explicit_sigma_respected(self, rng):
        groups, _ = separated_groups(rng, per_cluster=4)
        result = run_pipeline(
            groups, PipelineConfig(algorithm=ALGO_BHATTACHARYYA, k=2, sigma=2.5)
        )
        assert result.diagnostics["bandwidth_sigma"] == 2.5
        assert result.warnings == ()

    def test_too_few_groups(self, rng):
        groups, _ = separated_groups(rng, per_cluster=1)
        with pytest.raises(InvalidConfig):
            run_pipeline(groups, PipelineConfig(algorithm=ALGO_KL, k=5))


class TestBenchmarkSynthetic:
    def test_report_shape_and_scores(self):
        report = benchmark_synthetic(
            d_list=[3], k_list=[2], trials=3, base_seed=5,
            n_objects=16, samples_per_object=12, threads=1,
        )
        assert report["schema_version"] == 1
        assert report["kind"] == "synthetic"
        assert len(report["cells"]) == len(ALGORITHMS)
        for cell in report["cells"]:
            assert cell["trials"] == 3
            assert len(cell["scores"]) == 3
            scores = np.asarray(cell["scores"])
            assert cell["mean_nmi"] == pytest.approx(scores.mean())
            assert cell["var_nmi"] == pytest.approx(scores.var())
            assert 0.0 <= cell["mean_nmi"] <= 1.0

    def test_deterministic_across_runs(self):
        kwargs = dict(
            d_list=[2], k_list=[2], trials=2, base_seed=9,
            n_objects=12, samples_per_object=8, threads=1,
        )
        a = benchmark_synthetic(**kwargs)
        b = benchmark_synthetic(**kwargs)
        assert canonical_json_bytes(a) == canonical_json_bytes(b)

    def test_algorithm_subset(self):
        report = benchmark_synthetic(
            d_list=[2], k_list=[2], trials=2, base_seed=1,
            algorithms=(ALGO_KL,), n_objects=10, samples_per_object=6, threads=1,
        )
        assert [c["algorithm"] for c in report["cells"]] == [ALGO_KL]

    def test_validation(self):
        with pytest.raises(InvalidConfig):
            benchmark_synthetic(d_list=[2], k_list=[2], trials=0)
        with pytest.raises(InvalidConfig):
            benchmark_synthetic(
                d_list=[2], k_list=[2], trials=1, algorithms=("unknown",)
            )


class TestBenchmarkStock:
    def test_zero_noise_gives_perfect_agreement(self, rng):
        groups, _ = separated_groups(rng, per_cluster=5)
        report = benchmark_stock(
            groups, k_list=[2], noise_sigmas=[0.0], trials=2, base_seed=3, threads=1
        )
        for cell in report["cells"]:
            assert cell["mean_nmi"] == 1.0
            assert cell["var_nmi"] == 0.0

    def test_heavy_noise_degrades(self, rng):
        groups, _ = separated_groups(rng, per_cluster=5, gap=3.0)
        report = benchmark_stock(
            groups,
            k_list=[2],
            noise_sigmas=[0.0, 50.0],
            trials=3,
            base_seed=3,
            algorithms=(ALGO_KL,),
            threads=1,
        )
        by_sigma = {c["noise_sigma"]: c["mean_nmi"] for c in report["cells"]}
        assert by_sigma[50.0] < by_sigma[0.0]

    def test_deterministic(self, rng):
        groups, _ = separated_groups(rng, per_cluster=4)
        kwargs = dict(
            k_list=[2], noise_sigmas=[1.0], trials=2, base_seed=7,
            algorithms=(ALGO_KLPP,), threads=1,
        )
        a = benchmark_stock(groups, **kwargs)
        b = benchmark_stock(groups, **kwargs)
        assert canonical_json_bytes(a) == canonical_json_bytes(b)

    def test_validation(self, rng):
        groups, _ = separated_groups(rng, per_cluster=3)
        with pytest.raises(InvalidConfig):
            benchmark_stock(groups, k_list=[2], noise_sigmas=[-1.0], trials=1)
        with pytest.raises(InvalidConfig):
            benchmark_stock(groups, k_list=[2], noise_sigmas=[1.0], trials=0)


class TestThreads:
    def test_explicit_wins(self, monkeypatch):
        monkeypatch.setenv("DISTCLUST_THREADS", "7")
        assert resolve_threads(3) == 3

    def test_env_fallback(self, monkeypatch):
        monkeypatch.setenv("DISTCLUST_THREADS", "5")
        assert resolve_threads(None) == 5

    def test_default_positive(self, monkeypatch):
        monkeypatch.delenv("DISTCLUST_THREADS", raising=False)
        assert resolve_threads(None) >= 1

    def test_bad_values(self, monkeypatch):
        with pytest.raises(InvalidConfig):
            resolve_threads(0)
        monkeypatch.setenv("DISTCLUST_THREADS", "two")
        with pytest.raises(InvalidConfig):
            resolve_threads(None)
        monkeypatch.setenv("DISTCLUST_THREADS", "0")
        with pytest.raises(InvalidConfig):
            resolve_threads(None)

    def test_worker_pool_matches_inline(self):
        kwargs = dict(
            d_list=[2], k_list=[2], trials=2, base_seed=4,
            n_objects=10, samples_per_object=6, algorithms=(ALGO_KMEANS_MEANS,),
        )
        inline = benchmark_synthetic(threads=1, **kwargs)
        pooled = benchmark_synthetic(threads=2, **kwargs)
        assert canonical_json_bytes(inline) == canonical_json_bytes(pooled)


class TestWriteReport:
    def test_files_written(self, tmp_path):
        report = benchmark_synthetic(
            d_list=[2], k_list=[2], trials=1, base_seed=0,
            n_objects=8, samples_per_object=5, algorithms=(ALGO_KL,), threads=1,
        )
        json_path, csv_path = write_report(report, tmp_path / "out")
        loaded = json.loads((tmp_path / "out" / "report.json").read_text())
        assert loaded["schema_version"] == 1
        lines = (tmp_path / "out" / "summary.csv").read_text().strip().splitlines()
        assert len(lines) == 1 + len(report["cells"])
        assert lines[0].startswith("d,k,algorithm")
