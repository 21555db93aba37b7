"""Closed-form relations between clean and noisy binary posteriors.

Labels are corrupted by feature-independent random flipping: a true
class-1 label is observed as 0 with probability gamma1, a true class-0
label is observed as 1 with probability gamma0.  Under that model the
posterior of the observed label is an affine image of the clean
posterior,

    p_noisy = (1 - gamma1 - gamma0) * p + gamma0,

invertible whenever gamma1 + gamma0 < 1.  Everything in this module is
a scalar, closed-form consequence of that one line: corrupting and
recovering posteriors, the decision thresholds that make a model
trained on flipped labels reproduce clean-label decisions, how flipping
shifts class priors, and the matching maximum-likelihood recovery for a
Bernoulli rate estimated from flipped coin tosses.

Decisions everywhere in this package compare a probability (or score)
against a threshold with ``>=`` and assign class 1 on ties.

All functions are pure; nothing here owns random state.
"""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class NoiseParams:
    """Label-flip probabilities gamma1 = P(1 observed as 0), gamma0 = P(0 observed as 1).

    Requires gamma1 + gamma0 < 1: at total noise 1 the observed labels
    carry no information about the clean ones and nothing is recoverable.
    """

    gamma1: float
    gamma0: float

    def __post_init__(self):
        object.__setattr__(self, "gamma1", float(self.gamma1))
        object.__setattr__(self, "gamma0", float(self.gamma0))
        if not 0.0 <= self.gamma1 < 1.0:
            raise ValueError(f"gamma1 must lie in [0, 1), got {self.gamma1}")
        if not 0.0 <= self.gamma0 < 1.0:
            raise ValueError(f"gamma0 must lie in [0, 1), got {self.gamma0}")
        if not self.gamma1 + self.gamma0 < 1.0:
            raise ValueError(
                "total noise gamma1 + gamma0 must be < 1 for the label "
                f"flipping to be invertible, got {self.gamma1 + self.gamma0}"
            )

    @property
    def total(self) -> float:
        """Total noise gamma1 + gamma0."""
        return self.gamma1 + self.gamma0

    @property
    def slope(self) -> float:
        """1 - gamma1 - gamma0: slope of the clean-to-noisy posterior map."""
        return 1.0 - self.gamma1 - self.gamma0


@dataclass(frozen=True)
class ClassPriors:
    """Binary class priors; p0 is always the derived complement 1 - p1."""

    p1: float

    def __post_init__(self):
        object.__setattr__(self, "p1", float(self.p1))
        if not 0.0 <= self.p1 <= 1.0:
            raise ValueError(f"p1 must lie in [0, 1], got {self.p1}")

    @property
    def p0(self) -> float:
        return 1.0 - self.p1


def clamp01(x: float) -> float:
    """Clamp to [0, 1].  Recovery functions never clamp on their own."""
    return min(1.0, max(0.0, float(x)))


def corrupt_posterior(p: float, noise: NoiseParams) -> float:
    """Posterior of the observed label given the clean posterior p.

    Returns (1 - gamma1 - gamma0) * p + gamma0; the image of [0, 1] is
    the band [gamma0, 1 - gamma1].
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"clean posterior must lie in [0, 1], got {p}")
    return noise.slope * p + noise.gamma0


def recover_posterior(p_noisy: float, noise: NoiseParams) -> float:
    """Invert corrupt_posterior: (p_noisy - gamma0) / (1 - gamma1 - gamma0).

    Deliberately unclamped: an estimated noisy posterior can land outside
    the attainable band [gamma0, 1 - gamma1], and the overshoot is real
    information about estimation error.  Apply clamp01 afterwards when a
    hard probability is required.
    """
    return (float(p_noisy) - noise.gamma0) / noise.slope


def noisy_decision_threshold(noise: NoiseParams) -> float:
    """Threshold on the noisy posterior that reproduces the clean rule p >= 1/2.

    Equals (1 - gamma1 + gamma0) / 2, i.e. corrupt_posterior(1/2):
    comparing the noisy posterior against it decides exactly like
    comparing the clean posterior against 1/2.  Symmetric noise
    (gamma1 == gamma0) leaves the threshold at 1/2.
    """
    return (1.0 - noise.gamma1 + noise.gamma0) / 2.0


def error_amplification(noise: NoiseParams) -> float:
    """Factor by which recovery inflates estimation error in the noisy posterior.

    recover_posterior has slope 1 / (1 - gamma1 - gamma0) >= 1, so an error
    of eps on the noisy side becomes eps / (1 - total noise) on the clean
    side.  Equals 1 exactly at zero noise and diverges as total noise
    approaches 1.
    """
    return 1.0 / noise.slope


def propagate_priors(clean: ClassPriors, noise: NoiseParams) -> ClassPriors:
    """Class priors of the observed labels after flipping.

    p1 becomes (1 - gamma1) * p1 + gamma0 * p0: the class-1 mass that
    survives flipping plus the class-0 mass flipped into it.
    """
    return ClassPriors((1.0 - noise.gamma1) * clean.p1 + noise.gamma0 * clean.p0)


def logit_shift(train_prior: ClassPriors, eval_prior: ClassPriors) -> float:
    """Log-odds gap between training-label priors and evaluation priors.

    delta = logit(p1_train) - logit(p1_eval).  A sigmoid-output model fit
    under train_prior scores systematically delta higher than the data to
    be classified warrants, so delta doubles as a score-space decision
    threshold (threshold_from_shift) and as a final-bias correction
    (mlp.shift_bias).  Boundary priors have no finite logit and are
    rejected.
    """
    for name, prior in (("train_prior", train_prior), ("eval_prior", eval_prior)):
        if not 0.0 < prior.p1 < 1.0:
            raise ValueError(f"{name}.p1 must lie strictly inside (0, 1), got {prior.p1}")
    return math.log(train_prior.p1 / train_prior.p0) - math.log(eval_prior.p1 / eval_prior.p0)


def threshold_from_shift(delta: float) -> float:
    """Probability-space threshold equivalent to deciding at score >= delta.

    sigmoid(delta), evaluated on the stable branch so that large |delta|
    neither overflows nor loses precision.
    """
    delta = float(delta)
    if not math.isfinite(delta):
        raise ValueError(f"score shift must be finite, got {delta}")
    if delta >= 0.0:
        return 1.0 / (1.0 + math.exp(-delta))
    e = math.exp(delta)
    return e / (1.0 + e)


def threshold_from_priors(eval_prior: ClassPriors, noisy_train_prior: ClassPriors) -> float:
    """Decision threshold correcting a train/eval prior mismatch, log-free.

    p0_eval * p1_train / (p1_eval * p0_train + p0_eval * p1_train).
    For interior priors this agrees with
    threshold_from_shift(logit_shift(noisy_train_prior, eval_prior)) to
    floating-point accuracy while avoiding logarithms entirely.
    """
    num = eval_prior.p0 * noisy_train_prior.p1
    return num / (eval_prior.p1 * noisy_train_prior.p0 + num)


def _as_binary_array(observations) -> np.ndarray:
    obs = np.asarray(observations)
    if obs.size == 0:
        raise ValueError("need at least one observation")
    if not np.isin(obs, (0, 1)).all():
        raise ValueError("observations must all be 0 or 1")
    return obs.astype(np.float64).ravel()


def mle_flipped_bernoulli(observations, noise: NoiseParams) -> tuple[float, float]:
    """Maximum-likelihood (noisy_rate, clean_rate) from flipped 0/1 tosses.

    The ML estimate of the observed rate is the sample mean; since the
    observed rate is an invertible affine function of the clean rate, the
    ML estimate of the clean rate is its recovery
    (mean - gamma0) / (1 - gamma1 - gamma0).  Returned unclamped, like
    recover_posterior.
    """
    obs = _as_binary_array(observations)
    noisy_rate = float(obs.mean())
    return noisy_rate, recover_posterior(noisy_rate, noise)


def bernoulli_grid_mle(observations, noise: NoiseParams, step: float = 1e-4) -> float:
    """Brute-force ML estimate of the clean rate by likelihood grid search.

    Scans clean-rate candidates spaced ``step`` apart across [0, 1] and
    maximizes the exact flipped-Bernoulli log-likelihood

        k * log(q) + (m - k) * log(1 - q),   q = corrupt_posterior(p).

    Slow and entirely independent of the closed form in
    mle_flipped_bernoulli; kept as a cross-check oracle.  Ties resolve to
    the smallest candidate.
    """
    if not 0.0 < step <= 0.5:
        raise ValueError(f"step must lie in (0, 0.5], got {step}")
    obs = _as_binary_array(observations)
    k = obs.sum()
    m = obs.size
    grid = np.linspace(0.0, 1.0, round(1.0 / step) + 1)
    q = noise.slope * grid + noise.gamma0
    with np.errstate(divide="ignore", invalid="ignore"):
        loglik = np.where(k > 0, k * np.log(q), 0.0)
        loglik = loglik + np.where(m - k > 0, (m - k) * np.log1p(-q), 0.0)
    return float(grid[int(np.argmax(loglik))])
