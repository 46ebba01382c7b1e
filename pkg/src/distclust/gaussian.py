"""Per-object Gaussian estimation.

Each object in a dataset is a group of sample vectors assumed drawn from a
single hidden Gaussian. This module holds the group container, the fitted
model, and the estimator that maps one to the other.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InsufficientSamples, InvalidMatrix
from .matrixcore import (
    DEFAULT_TOLERANCES,
    SymMatrix,
    psd_clamped_eigenvalues,
    regularize,
    spd_logdet,
    spd_inverse,
    spd_sqrt,
)

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True, eq=False)
class SampleGroup:
    """One object's samples: a (q, d) array of q vectors in R^d, q >= 2."""

    group_id: str
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 2:
            raise DimensionMismatch(
                f"group {self.group_id!r}: samples must be a 2-d array, "
                f"got ndim={s.ndim}"
            )
        if s.shape[0] < 2:
            raise InsufficientSamples(
                f"group {self.group_id!r}: needs at least 2 samples, got {s.shape[0]}"
            )
        if s.shape[1] < 1:
            raise DimensionMismatch(f"group {self.group_id!r}: zero-dimensional samples")
        if not np.all(np.isfinite(s)):
            raise InvalidMatrix(f"group {self.group_id!r}: samples must be finite")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def count(self) -> int:
        return self.samples.shape[0]

    @property
    def dim(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True, eq=False)
class GaussianModel:
    """Fitted Gaussian N(mean, covariance) for one object."""

    mean: np.ndarray
    covariance: SymMatrix
    group_id: str = field(default="")

    def __post_init__(self):
        mu = np.asarray(self.mean, dtype=float)
        if mu.ndim != 1 or mu.size < 1:
            raise DimensionMismatch(f"mean must be a 1-d vector, got ndim={mu.ndim}")
        if not np.all(np.isfinite(mu)):
            raise InvalidMatrix("mean entries must be finite")
        if mu.size != self.covariance.dim:
            raise DimensionMismatch(
                f"mean dimension {mu.size} does not match covariance "
                f"dimension {self.covariance.dim}"
            )
        # Validates PSD up to tolerance; raises NotPositiveSemidefinite otherwise.
        psd_clamped_eigenvalues(
            np.linalg.eigvalsh(self.covariance.values), DEFAULT_TOLERANCES
        )
        mu = mu.copy()
        mu.flags.writeable = False
        object.__setattr__(self, "mean", mu)

    @property
    def dim(self) -> int:
        return self.mean.size


def estimate_gaussian(group: SampleGroup, eps_scale: float = 1e-8) -> GaussianModel:
    """Fit N(m, S) to a sample group.

    m is the sample mean and S the unbiased sample covariance (1/(q-1)
    normalization), followed by a trace-scaled diagonal ridge of eps_scale
    so downstream inverses and log-determinants are defined even when
    q - 1 < d leaves the raw estimate rank-deficient.
    """
    mean = group.samples.mean(axis=0)
    dev = group.samples - mean
    cov = SymMatrix((dev.T @ dev) / (group.count - 1))
    return GaussianModel(mean, regularize(cov, eps_scale), group_id=group.group_id)


def log_density(model: GaussianModel, x: np.ndarray) -> np.ndarray | float:
    """Gaussian log-density at x.

    Accepts a single point of shape (d,) -> float, or a batch (n, d) -> (n,).
    """
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != model.dim:
        raise DimensionMismatch(
            f"points of dimension {pts.shape[-1] if pts.ndim else '?'} against "
            f"a model of dimension {model.dim}"
        )
    logdet = spd_logdet(model.covariance)
    inv = spd_inverse(model.covariance).values
    dev = pts - model.mean
    quad = np.einsum("ij,jk,ik->i", dev, inv, dev)
    out = -0.5 * (model.dim * LOG_2PI + logdet + quad)
    return float(out[0]) if single else out


def sample(
    model: GaussianModel,
    count: int,
    rng: np.random.Generator,
    group_id: str = "",
) -> SampleGroup:
    """Draw ``count`` points from the model as a new SampleGroup.

    Uses mean + z @ sqrt(cov) with the symmetric matrix square root, so the
    draw is deterministic given the generator state.
    """
    if count < 2:
        raise InsufficientSamples(f"needs at least 2 samples, got {count}")
    root = spd_sqrt(model.covariance).values
    z = rng.standard_normal((count, model.dim))
    return SampleGroup(group_id or model.group_id, model.mean + z @ root)
