"""Synthetic two-class worlds with exactly known posteriors.

Each class-conditional density is a mixture of bivariate Gaussians, so
P(y=1 | x) is available in closed form and the accuracy of the optimal
decision rule can be measured on any sample — that is the ceiling every
trained model is judged against.  Random problems make class 1 a rigid
translate of class 0, which turns the translation distance into a clean
difficulty knob: zero separation means indistinguishable classes.

Label corruption is feature-independent flipping applied after sampling,
so a corrupted dataset carries both the clean label y and the observed
label z.  All sampling is a pure function of (problem, n, seed); random
streams come from seeding.make_rng.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .calculus import ClassPriors, NoiseParams
from .seeding import make_rng

_LOG_2PI = math.log(2.0 * math.pi)

CSV_FIELDS = ("x1", "x2", "y_clean", "z_observed")


class DatasetFormatError(ValueError):
    """A dataset CSV failed to parse; the message carries the line number."""


@dataclass(frozen=True)
class GmmClassModel:
    """Gaussian mixture over R^2: weights (k,), means (k, 2), covariances (k, 2, 2)."""

    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        mu = np.asarray(self.means, dtype=np.float64)
        cov = np.asarray(self.covariances, dtype=np.float64)
        if w.ndim != 1 or w.size < 1:
            raise ValueError(f"weights must be a non-empty vector, got shape {w.shape}")
        k = w.size
        if mu.shape != (k, 2):
            raise ValueError(f"means must have shape ({k}, 2), got {mu.shape}")
        if cov.shape != (k, 2, 2):
            raise ValueError(f"covariances must have shape ({k}, 2, 2), got {cov.shape}")
        if (w < 0).any():
            raise ValueError("component weights must be non-negative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"component weights must sum to 1 within 1e-12, sum is {w.sum()!r}")
        if not (np.isfinite(mu).all() and np.isfinite(cov).all()):
            raise ValueError("means and covariances must be finite")
        for i in range(k):
            c = cov[i]
            if not np.allclose(c, c.T, rtol=0.0, atol=1e-12):
                raise ValueError(f"covariance {i} is not symmetric")
            try:
                np.linalg.cholesky(c)
            except np.linalg.LinAlgError:
                raise ValueError(f"covariance {i} is not positive definite") from None
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "covariances", cov)

    @property
    def n_components(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class ProblemInstance:
    """A two-class world: one mixture per class plus the clean class priors."""

    model1: GmmClassModel
    model0: GmmClassModel
    clean_priors: ClassPriors
    seed: int


@dataclass(frozen=True)
class LabeledSample:
    x: np.ndarray  # (2,)
    y_clean: int
    z_observed: int


@dataclass(frozen=True)
class Dataset:
    """Column store of samples; indexes like a sequence of LabeledSample.

    Arrays are shared, not copied — treat a Dataset as read-only.
    """

    x: np.ndarray           # (n, 2) float64
    y_clean: np.ndarray     # (n,) int64, values in {0, 1}
    z_observed: np.ndarray  # (n,) int64, values in {0, 1}

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y_clean, dtype=np.int64)
        z = np.asarray(self.z_observed, dtype=np.int64)
        if x.ndim != 2 or x.shape[1] != 2:
            raise ValueError(f"features must have shape (n, 2), got {x.shape}")
        n = x.shape[0]
        if y.shape != (n,) or z.shape != (n,):
            raise ValueError("label columns must match the number of feature rows")
        if not np.isfinite(x).all():
            raise ValueError("features must be finite")
        for name, col in (("y_clean", y), ("z_observed", z)):
            if not np.isin(col, (0, 1)).all():
                raise ValueError(f"{name} must contain only 0/1 values")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y_clean", y)
        object.__setattr__(self, "z_observed", z)

    def __len__(self) -> int:
        return self.x.shape[0]

    def __getitem__(self, i: int) -> LabeledSample:
        return LabeledSample(self.x[i], int(self.y_clean[i]), int(self.z_observed[i]))


def _random_spd(rng: np.random.Generator) -> np.ndarray:
    """Random rotation of diag(l1, l2) with eigenvalues uniform in [0.3, 1.5]."""
    lam = rng.uniform(0.3, 1.5, size=2)
    theta = rng.uniform(0.0, 2.0 * math.pi)
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    cov = rot @ np.diag(lam) @ rot.T
    return (cov + cov.T) / 2.0  # kill the asymmetry rounding leaves behind


def make_random_problem(seed: int, separation_scale: float, p1: float = 0.5) -> ProblemInstance:
    """Random two-component mixture problem, deterministic in ``seed``.

    Class 0 gets component weights uniform on the simplex, component means
    uniform in [-3, 3]^2 and random anisotropic covariances; class 1 is the
    same mixture translated by ``separation_scale`` along one random unit
    direction.  Separation near 0 therefore makes the classes coincide, and
    large separation makes them trivially distinct.
    """
    if not separation_scale > 0.0:
        raise ValueError(f"separation_scale must be > 0, got {separation_scale}")
    priors = ClassPriors(p1)
    rng = make_rng(seed, "problem")
    k = 2
    weights = rng.dirichlet(np.ones(k))
    means = rng.uniform(-3.0, 3.0, size=(k, 2))
    covs = np.stack([_random_spd(rng) for _ in range(k)])
    theta = rng.uniform(0.0, 2.0 * math.pi)
    offset = separation_scale * np.array([math.cos(theta), math.sin(theta)])
    model0 = GmmClassModel(weights, means, covs)
    model1 = GmmClassModel(weights, means + offset, covs)
    return ProblemInstance(model1, model0, priors, int(seed))


def _component_log_pdf(x: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> np.ndarray:
    # explicit 2x2 bivariate normal; cov was validated SPD at construction
    a, b = cov[0, 0], cov[0, 1]
    c, d = cov[1, 0], cov[1, 1]
    det = a * d - b * c
    dx = x[..., 0] - mean[0]
    dy = x[..., 1] - mean[1]
    with np.errstate(over="ignore", invalid="ignore"):
        quad = (d * dx * dx - (b + c) * dx * dy + a * dy * dy) / det
    # the form is positive definite, so a NaN from overflowing inf - inf means +inf
    quad = np.where(np.isnan(quad), np.inf, quad)
    return -_LOG_2PI - 0.5 * math.log(det) - 0.5 * quad


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.exp(a - m).sum(axis=axis)) + np.squeeze(m, axis=axis)
    return out


def gmm_log_density(model: GmmClassModel, x) -> float | np.ndarray:
    """Log mixture density at x; accepts one point (2,) or a batch (m, 2)."""
    x = _as_points(x)
    with np.errstate(divide="ignore"):
        log_w = np.log(model.weights)
    per_comp = np.stack(
        [log_w[i] + _component_log_pdf(x, model.means[i], model.covariances[i])
         for i in range(model.n_components)],
        axis=-1,
    )
    out = _logsumexp(per_comp, axis=-1)
    return float(out) if out.ndim == 0 else out


def gmm_density(model: GmmClassModel, x) -> float | np.ndarray:
    """Mixture density at x (non-negative; integrates to 1)."""
    return np.exp(gmm_log_density(model, x))


def _as_points(x) -> np.ndarray:
    pts = np.asarray(x, dtype=np.float64)
    if pts.shape[-1:] != (2,):
        raise ValueError(f"points must have trailing dimension 2, got shape {pts.shape}")
    if not np.isfinite(pts).all():
        raise ValueError("points must be finite")
    return pts


def clean_posterior(problem: ProblemInstance, x) -> float | np.ndarray:
    """Exact P(y=1 | x), computed in log space.

    Works through the log-odds log(P1 f1(x)) - log(P0 f0(x)) and a stable
    sigmoid, so it survives x far in the tails where both densities
    underflow a direct Bayes quotient.  If both class log-densities are
    non-finite (beyond even log-space range) the prior p1 is returned.
    """
    x = _as_points(x)
    with np.errstate(divide="ignore"):
        l1 = np.log(problem.clean_priors.p1) + gmm_log_density(problem.model1, x)
        l0 = np.log(problem.clean_priors.p0) + gmm_log_density(problem.model0, x)
    with np.errstate(invalid="ignore"):
        gap = np.asarray(l1 - l0)
        post = _sigmoid(np.where(np.isnan(gap), 0.0, gap))
        post = np.where(np.isnan(gap), problem.clean_priors.p1, post)
    return float(post) if post.ndim == 0 else post


def _sigmoid(s: np.ndarray) -> np.ndarray:
    t = np.exp(-np.abs(s))
    return np.where(s >= 0.0, 1.0 / (1.0 + t), t / (1.0 + t))


def sample_dataset(problem: ProblemInstance, n: int, seed: int) -> Dataset:
    """Draw n labeled points; observed labels start out equal to clean ones."""
    if n < 1:
        raise ValueError(f"need n >= 1 samples, got {n}")
    rng = make_rng(seed, "sample")
    y = (rng.random(n) < problem.clean_priors.p1).astype(np.int64)
    x = np.empty((n, 2))
    for label, model in ((1, problem.model1), (0, problem.model0)):
        idx = np.flatnonzero(y == label)
        if idx.size:
            x[idx] = _sample_mixture(model, idx.size, rng)
    return Dataset(x, y, y.copy())


def _sample_mixture(model: GmmClassModel, m: int, rng: np.random.Generator) -> np.ndarray:
    comp = rng.choice(model.n_components, size=m, p=model.weights)
    z = rng.standard_normal((m, 2))
    chol = np.linalg.cholesky(model.covariances)
    return model.means[comp] + np.einsum("nij,nj->ni", chol[comp], z)


def flip_labels(data: Dataset, noise: NoiseParams, seed: int) -> Dataset:
    """Flip each clean label independently at its class's flip rate.

    Features and clean labels are untouched (and shared with the input);
    only the observed column changes.
    """
    rng = make_rng(seed, "flip")
    u = rng.random(len(data))
    z = data.y_clean.copy()
    z[(data.y_clean == 1) & (u < noise.gamma1)] = 0
    z[(data.y_clean == 0) & (u < noise.gamma0)] = 1
    return Dataset(data.x, data.y_clean, z)


def bayes_accuracy(problem: ProblemInstance, data: Dataset) -> float:
    """Accuracy of the optimal rule (posterior >= 1/2 picks class 1) on clean labels.

    This is the ceiling: no classifier evaluated on the same sample can
    beat it by more than sampling error.
    """
    if len(data) == 0:
        raise ValueError("cannot score an empty dataset")
    pred = np.asarray(clean_posterior(problem, data.x)) >= 0.5
    return float((pred == (data.y_clean == 1)).mean())


def save_dataset_csv(data: Dataset, path) -> None:
    """Write x1,x2,y_clean,z_observed rows; floats keep 17 significant digits."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(CSV_FIELDS) + "\n")
        for i in range(len(data)):
            fh.write(
                f"{data.x[i, 0]:.17g},{data.x[i, 1]:.17g},"
                f"{data.y_clean[i]:d},{data.z_observed[i]:d}\n"
            )


def load_dataset_csv(path) -> Dataset:
    """Inverse of save_dataset_csv; bad input raises DatasetFormatError with a line number."""
    xs: list[tuple[float, float]] = []
    ys: list[int] = []
    zs: list[int] = []
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DatasetFormatError("line 1: file is empty")
        if tuple(header) != CSV_FIELDS:
            raise DatasetFormatError(
                f"line 1: expected header {','.join(CSV_FIELDS)!r}, got {','.join(header)!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise DatasetFormatError(f"line {lineno}: expected 4 fields, got {len(row)}")
            try:
                x1, x2 = float(row[0]), float(row[1])
                y, z = int(row[2]), int(row[3])
            except ValueError as exc:
                raise DatasetFormatError(f"line {lineno}: {exc}") from None
            if not (math.isfinite(x1) and math.isfinite(x2)):
                raise DatasetFormatError(f"line {lineno}: features must be finite")
            if y not in (0, 1) or z not in (0, 1):
                raise DatasetFormatError(f"line {lineno}: labels must be 0 or 1")
            xs.append((x1, x2))
            ys.append(y)
            zs.append(z)
    if not xs:
        raise DatasetFormatError("line 2: no data rows")
    return Dataset(np.array(xs, dtype=np.float64), np.array(ys), np.array(zs))
