"""Divergences between fitted Gaussians and the pairwise distance matrix.

Three model divergences are provided:

* squared 2-Wasserstein distance,
  ``|m1 - m2|^2 + Tr(S1 + S2 - 2 (S1^{1/2} S2 S1^{1/2})^{1/2})``
* Bhattacharyya distance,
  ``(1/8) d^T Sbar^{-1} d + (1/2) ln(|Sbar| / sqrt(|S1| |S2|))``
  with ``Sbar = (S1 + S2)/2``
* Kullback-Leibler divergence (asymmetric),
  ``(1/2) [ln(|S2|/|S1|) - d + Tr(S2^{-1} S1) + d^T S2^{-1} d]``

plus plain Euclidean distance between means for the mean-only baselines.

Scalar entry points and the matrix builder share the same pair kernels, so a
matrix entry equals the scalar call on the same pair bit-for-bit. All values
are mathematically non-negative; tiny negative results from rounding are
clamped to zero, anything below ``-negative_clamp`` raises NumericalError.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidMatrix,
    NotPositiveSemidefinite,
    NumericalError,
    SingularMatrix,
)
from .gaussian import GaussianModel
from .matrixcore import (
    DEFAULT_TOLERANCES,
    SymMatrix,
    Tolerances,
    psd_clamped_eigenvalues,
    spd_inverse,
    spd_logdet,
    spd_sqrt,
)

METRIC_WASSERSTEIN_SQ = "wasserstein_sq"
METRIC_BHATTACHARYYA = "bhattacharyya"
METRIC_KL = "kl"
METRIC_EUCLIDEAN = "euclidean"

KNOWN_METRICS = (
    METRIC_WASSERSTEIN_SQ,
    METRIC_BHATTACHARYYA,
    METRIC_KL,
    METRIC_EUCLIDEAN,
)

# kl is a directed divergence; everything else is a metric-like symmetric value
SYMMETRIC_METRICS = frozenset(
    {METRIC_WASSERSTEIN_SQ, METRIC_BHATTACHARYYA, METRIC_EUCLIDEAN}
)


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """n x n matrix of pairwise divergences, tagged with the metric name.

    Construction canonicalizes floating-point noise: diagonals within
    tolerance of zero become exactly zero, near-negative entries are clamped
    to zero, and for symmetric metrics the lower triangle is replaced by an
    exact mirror of the upper one.
    """

    values: np.ndarray
    metric: str

    def __post_init__(self):
        if self.metric not in KNOWN_METRICS:
            raise InvalidMatrix(f"unknown metric tag {self.metric!r}")
        a = np.array(self.values, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise InvalidMatrix(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidMatrix("distance entries must be finite")
        tol = DEFAULT_TOLERANCES.negative_clamp
        diag = np.diagonal(a)
        if np.any(np.abs(diag) > tol):
            raise InvalidMatrix(
                f"self-distance as large as {np.abs(diag).max():.6e} on the diagonal"
            )
        if a.min() < -tol:
            raise InvalidMatrix(f"negative distance entry {a.min():.6e}")
        np.fill_diagonal(a, 0.0)
        np.clip(a, 0.0, None, out=a)
        if self.metric in SYMMETRIC_METRICS:
            gap = np.abs(a - a.T).max()
            if gap > tol * max(1.0, float(np.abs(a).max())):
                raise InvalidMatrix(
                    f"matrix tagged {self.metric!r} is asymmetric by {gap:.6e}"
                )
            upper = np.triu(a, 1)
            a = upper + upper.T
        a.flags.writeable = False
        object.__setattr__(self, "values", a)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def is_symmetric(self) -> bool:
        return self.metric in SYMMETRIC_METRICS


def _guard_nonneg(value: float, tol: Tolerances, what: str) -> float:
    if value < -tol.negative_clamp:
        raise NumericalError(f"{what} evaluated to {value:.6e}")
    return max(value, 0.0)


def _check_dims(a: GaussianModel, b: GaussianModel):
    if a.dim != b.dim:
        raise DimensionMismatch(
            f"models of dimension {a.dim} and {b.dim} are not comparable"
        )


def _bures_cross(root1: np.ndarray, cov2: np.ndarray, tol: Tolerances) -> float:
    """Tr((S1^{1/2} S2 S1^{1/2})^{1/2}) given the square root of S1."""
    inner = SymMatrix(root1 @ cov2 @ root1)
    w = psd_clamped_eigenvalues(np.linalg.eigvalsh(inner.values), tol)
    return float(np.sum(np.sqrt(w)))


def _wasserstein_pair(
    mean1: np.ndarray,
    trace1: float,
    root1: np.ndarray,
    mean2: np.ndarray,
    trace2: float,
    cov2: np.ndarray,
    tol: Tolerances,
) -> float:
    diff = mean1 - mean2
    val = float(diff @ diff) + trace1 + trace2 - 2.0 * _bures_cross(root1, cov2, tol)
    return _guard_nonneg(val, tol, "squared Wasserstein distance")


def _bhattacharyya_pair(
    mean1: np.ndarray,
    logdet1: float,
    cov1: np.ndarray,
    mean2: np.ndarray,
    logdet2: float,
    cov2: np.ndarray,
    tol: Tolerances,
) -> float:
    mixed = SymMatrix((cov1 + cov2) / 2.0)
    diff = mean2 - mean1
    quad = float(diff @ spd_inverse(mixed, tol).values @ diff)
    val = 0.125 * quad + 0.5 * (spd_logdet(mixed, tol) - 0.5 * (logdet1 + logdet2))
    return _guard_nonneg(val, tol, "Bhattacharyya distance")


def _kl_pair(
    mean1: np.ndarray,
    cov1: np.ndarray,
    logdet1: float,
    mean2: np.ndarray,
    logdet2: float,
    inv2: np.ndarray,
    tol: Tolerances,
) -> float:
    d = mean1.size
    diff = mean2 - mean1
    trace = float(np.sum(inv2 * cov1))
    quad = float(diff @ inv2 @ diff)
    val = 0.5 * (logdet2 - logdet1 - d + trace + quad)
    return _guard_nonneg(val, tol, "KL divergence")


def wasserstein_sq(
    a: GaussianModel, b: GaussianModel, tol: Tolerances = DEFAULT_TOLERANCES
) -> float:
    """Squared 2-Wasserstein distance between two Gaussians."""
    _check_dims(a, b)
    return _wasserstein_pair(
        a.mean,
        float(np.trace(a.covariance.values)),
        spd_sqrt(a.covariance, tol).values,
        b.mean,
        float(np.trace(b.covariance.values)),
        b.covariance.values,
        tol,
    )


def bhattacharyya(
    a: GaussianModel, b: GaussianModel, tol: Tolerances = DEFAULT_TOLERANCES
) -> float:
    """Bhattacharyya distance between two Gaussians."""
    _check_dims(a, b)
    return _bhattacharyya_pair(
        a.mean,
        spd_logdet(a.covariance, tol),
        a.covariance.values,
        b.mean,
        spd_logdet(b.covariance, tol),
        b.covariance.values,
        tol,
    )


def kl_divergence(
    a: GaussianModel, b: GaussianModel, tol: Tolerances = DEFAULT_TOLERANCES
) -> float:
    """KL(a || b) for two Gaussians. Asymmetric: KL(a||b) != KL(b||a)."""
    _check_dims(a, b)
    return _kl_pair(
        a.mean,
        a.covariance.values,
        spd_logdet(a.covariance, tol),
        b.mean,
        spd_logdet(b.covariance, tol),
        spd_inverse(b.covariance, tol).values,
        tol,
    )


def _common_dim(models: Sequence[GaussianModel]) -> int:
    if not models:
        raise InvalidMatrix("need at least one model")
    d = models[0].dim
    for m in models[1:]:
        if m.dim != d:
            raise DimensionMismatch(
                f"models of dimension {d} and {m.dim} are not comparable"
            )
    return d


def _pair_context(i: int, j: int, exc: Exception):
    return type(exc)(f"pair ({i}, {j}): {exc}")


def distance_matrix(
    models: Sequence[GaussianModel],
    metric: str,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> DistanceMatrix:
    """Pairwise divergence matrix over a list of models.

    Per-model quantities (matrix square roots, log-determinants, inverses)
    are computed once and reused across pairs. Symmetric metrics fill the
    upper triangle and mirror it; kl fills both triangles independently.
    """
    if metric not in KNOWN_METRICS:
        raise InvalidMatrix(f"unknown metric tag {metric!r}")
    _common_dim(models)
    n = len(models)
    if metric == METRIC_EUCLIDEAN:
        return mean_euclidean_matrix(models)
    out = np.zeros((n, n))
    means = [m.mean for m in models]
    covs = [m.covariance.values for m in models]
    _FAILURES = (NotPositiveSemidefinite, SingularMatrix, NumericalError)

    def per_model(fn):
        results = []
        for i, m in enumerate(models):
            try:
                results.append(fn(m))
            except _FAILURES as exc:
                raise type(exc)(f"model {i}: {exc}") from exc
        return results

    if metric == METRIC_WASSERSTEIN_SQ:
        traces = [float(np.trace(c)) for c in covs]
        roots = per_model(lambda m: spd_sqrt(m.covariance, tol).values)
    elif metric in (METRIC_BHATTACHARYYA, METRIC_KL):
        logdets = per_model(lambda m: spd_logdet(m.covariance, tol))
        if metric == METRIC_KL:
            invs = per_model(lambda m: spd_inverse(m.covariance, tol).values)
    pairs = (
        ((i, j) for i in range(n) for j in range(n) if i != j)
        if metric == METRIC_KL
        else ((i, j) for i in range(n) for j in range(i + 1, n))
    )
    for i, j in pairs:
        try:
            if metric == METRIC_WASSERSTEIN_SQ:
                out[i, j] = _wasserstein_pair(
                    means[i], traces[i], roots[i], means[j], traces[j], covs[j], tol
                )
            elif metric == METRIC_BHATTACHARYYA:
                out[i, j] = _bhattacharyya_pair(
                    means[i], logdets[i], covs[i], means[j], logdets[j], covs[j], tol
                )
            else:
                out[i, j] = _kl_pair(
                    means[i], covs[i], logdets[i], means[j], logdets[j], invs[j], tol
                )
        except _FAILURES as exc:
            raise _pair_context(i, j, exc) from exc
    if metric in SYMMETRIC_METRICS:
        out = out + out.T
    return DistanceMatrix(out, metric)


def mean_euclidean_matrix(models: Sequence[GaussianModel]) -> DistanceMatrix:
    """Pairwise Euclidean distances between model means (covariances ignored)."""
    _common_dim(models)
    means = np.stack([m.mean for m in models])
    diff = means[:, None, :] - means[None, :, :]
    out = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    upper = np.triu(out, 1)
    return DistanceMatrix(upper + upper.T, METRIC_EUCLIDEAN)


def kl_divergence_table(
    models: Sequence[GaussianModel],
    centers: Sequence[GaussianModel],
    model_logdets: np.ndarray | None = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """(n_models, n_centers) table of KL(model_i || center_j).

    The inner loop of KL k-means. Per-center inverses/log-determinants are
    computed once; per-model log-determinants may be passed in to avoid
    recomputing them every iteration.
    """
    d = _common_dim(models)
    if _common_dim(centers) != d:
        raise DimensionMismatch("centers do not match model dimension")
    means = np.stack([m.mean for m in models])
    covs = np.stack([m.covariance.values for m in models])
    if model_logdets is None:
        model_logdets = np.array([spd_logdet(m.covariance, tol) for m in models])
    out = np.empty((len(models), len(centers)))
    for j, c in enumerate(centers):
        inv = spd_inverse(c.covariance, tol).values
        logdet = spd_logdet(c.covariance, tol)
        traces = np.einsum("jk,njk->n", inv, covs)
        dev = c.mean - means
        quads = np.einsum("nj,jk,nk->n", dev, inv, dev)
        out[:, j] = 0.5 * (logdet - model_logdets - d + traces + quads)
    low = float(out.min())
    if low < -tol.negative_clamp:
        raise NumericalError(f"KL divergence evaluated to {low:.6e}")
    np.clip(out, 0.0, None, out=out)
    return out
