"""Bayes-optimal classification of the noisy same-different task.

Two priors over the symbol pair: a generalizing one (symbols from the
true N(0, I/d) population) and a memorizing one (symbols uniform over a
fixed training pool).  Posteriors are evaluated entirely in log space
from the closed-form class likelihoods.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .rand import spawn_rng


@dataclass(frozen=True)
class GeneralizingPrior:
    sigma2: float
    d: int

    def __post_init__(self):
        _check_sigma2(self.sigma2)


@dataclass(frozen=True)
class MemorizingPrior:
    sigma2: float
    pool: object  # SymbolPool

    def __post_init__(self):
        _check_sigma2(self.sigma2)
        if self.pool.L < 2:
            raise ValueError("memorizing prior needs a pool with L >= 2")


def _check_sigma2(sigma2):
    if sigma2 <= 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")


def _check_inputs(z1, z2, d):
    z1 = np.asarray(z1, dtype=np.float64)
    z2 = np.asarray(z2, dtype=np.float64)
    if z1.shape != (d,) or z2.shape != (d,):
        raise ValueError(f"inputs must be length-{d} vectors")
    if not (np.all(np.isfinite(z1)) and np.all(np.isfinite(z2))):
        raise ValueError("inputs must be finite")
    return z1, z2


def _log_likelihoods_generalizing(z1, z2, sigma2, d):
    """log p(z1, z2 | r) for symbols s ~ N(0, I/d), noise N(0, sigma2 I/d)."""
    n1 = float(z1 @ z1)
    n2 = float(z2 @ z2)
    dot = float(z1 @ z2)
    # r = 1: per coordinate, (z1, z2) are joint Gaussian with variance
    # (1 + sigma2)/d and covariance 1/d
    log_same = d * math.log(d / (2.0 * math.pi * math.sqrt(sigma2 * (2.0 + sigma2)))) - (
        d / (2.0 * sigma2)
    ) * ((1.0 + sigma2) / (2.0 + sigma2) * (n1 + n2) - 2.0 / (2.0 + sigma2) * dot)
    # r = 0: independent marginals N(0, (1 + sigma2)/d) per coordinate
    log_diff = d * math.log(d / (2.0 * math.pi * (1.0 + sigma2))) - (d / 2.0) * (
        (n1 + n2) / (1.0 + sigma2)
    )
    return log_same, log_diff


def posterior_generalizing(z1, z2, prior):
    """p(r = 1 | z1, z2) under the generalizing prior."""
    z1, z2 = _check_inputs(z1, z2, prior.d)
    log_same, log_diff = _log_likelihoods_generalizing(z1, z2, prior.sigma2, prior.d)
    return _posterior_from_logs(log_same, log_diff)


def _log_gauss(z, means, sigma2, d):
    """log N(z; mean_i, sigma2 I / d) for every row of means."""
    sq = np.sum((z[None, :] - means) ** 2, axis=1)
    return -0.5 * d * math.log(2.0 * math.pi * sigma2 / d) - (d / (2.0 * sigma2)) * sq


def posterior_memorizing(z1, z2, prior):
    """p(r = 1 | z1, z2) under the pool-mixture prior.

    Same likelihood mixes L single-symbol terms, different mixes the
    L(L-1) ordered pairs; both are collapsed with log-sum-exp.
    """
    pool = prior.pool
    z1, z2 = _check_inputs(z1, z2, pool.d)
    lg1 = _log_gauss(z1, pool.symbols, prior.sigma2, pool.d)
    lg2 = _log_gauss(z2, pool.symbols, prior.sigma2, pool.d)

    log_same = logsumexp(lg1 + lg2) - math.log(pool.L)
    # sum over i != j of exp(lg1_i + lg2_j), in log space
    pair = lg1[:, None] + lg2[None, :]
    np.fill_diagonal(pair, -np.inf)
    log_diff = logsumexp(pair) - math.log(pool.L * (pool.L - 1))
    return _posterior_from_logs(log_same, log_diff)


def _posterior_from_logs(log_same, log_diff):
    # p = 1 / (1 + exp(log_diff - log_same)), stable at both extremes
    delta = log_diff - log_same
    if delta >= 0:
        return float(math.exp(-delta) / (1.0 + math.exp(-delta)))
    return float(1.0 / (1.0 + math.exp(delta)))


def bayes_classify(posterior):
    """Threshold at 1/2; the tie goes to class 1."""
    if not 0.0 <= posterior <= 1.0:
        raise ValueError(f"posterior must be in [0, 1], got {posterior}")
    return 1 if posterior >= 0.5 else 0


@dataclass(frozen=True)
class McAccuracy:
    accuracy: float
    stderr95: float  # 1.96 * sqrt(p (1 - p) / n)
    n: int


def _posteriors_generalizing_batch(Z1, Z2, sigma2, d):
    n1 = np.sum(Z1 * Z1, axis=1)
    n2 = np.sum(Z2 * Z2, axis=1)
    dot = np.sum(Z1 * Z2, axis=1)
    log_same = d * math.log(d / (2.0 * math.pi * math.sqrt(sigma2 * (2.0 + sigma2)))) - (
        d / (2.0 * sigma2)
    ) * ((1.0 + sigma2) / (2.0 + sigma2) * (n1 + n2) - 2.0 / (2.0 + sigma2) * dot)
    log_diff = d * math.log(d / (2.0 * math.pi * (1.0 + sigma2))) - (d / 2.0) * (
        (n1 + n2) / (1.0 + sigma2)
    )
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(np.clip(log_diff - log_same, -745, 745)))


def _log_gauss_batch(Z, means, sigma2, d):
    sq = (
        np.sum(Z * Z, axis=1)[:, None]
        - 2.0 * Z @ means.T
        + np.sum(means * means, axis=1)[None, :]
    )
    return -0.5 * d * math.log(2.0 * math.pi * sigma2 / d) - (d / (2.0 * sigma2)) * sq


def _posteriors_memorizing_batch(Z1, Z2, pool, sigma2, chunk=1024):
    L, d = pool.L, pool.d
    out = np.empty(Z1.shape[0])
    for lo in range(0, Z1.shape[0], chunk):
        hi = min(lo + chunk, Z1.shape[0])
        lg1 = _log_gauss_batch(Z1[lo:hi], pool.symbols, sigma2, d)
        lg2 = _log_gauss_batch(Z2[lo:hi], pool.symbols, sigma2, d)
        log_same = logsumexp(lg1 + lg2, axis=1) - math.log(L)
        pair = lg1[:, :, None] + lg2[:, None, :]
        ii = np.arange(L)
        pair[:, ii, ii] = -np.inf
        log_diff = logsumexp(pair.reshape(hi - lo, -1), axis=1) - math.log(L * (L - 1))
        delta = np.clip(log_diff - log_same, -745, 745)
        out[lo:hi] = 1.0 / (1.0 + np.exp(delta))
    return out


def bayes_accuracy_mc(prior_kind, sigma2, d, pool=None, n=100_000, seed=0):
    """Monte-Carlo accuracy of a prior's classifier on the true test
    distribution (fresh symbols, the generalizing generative process).

    Returns the accuracy with a 95 percent normal-approximation
    half-width.  The memorizing kind requires a pool.
    """
    if n < 1000:
        raise ValueError(f"need n >= 1000 samples, got {n}")
    if prior_kind == "memorizing":
        if pool is None:
            raise ValueError("memorizing prior needs a symbol pool")
        MemorizingPrior(sigma2=sigma2, pool=pool)  # validate
    elif prior_kind == "generalizing":
        GeneralizingPrior(sigma2=sigma2, d=d)  # validate
    else:
        raise ValueError(f"unknown prior kind {prior_kind!r}")

    rng = spawn_rng(seed, "bayes-mc", prior_kind, sigma2, d, n)
    scale = 1.0 / math.sqrt(d)
    noise = math.sqrt(sigma2) * scale
    r = rng.random(n) < 0.5
    s1 = rng.normal(0.0, scale, size=(n, d))
    s2 = np.where(r[:, None], s1, rng.normal(0.0, scale, size=(n, d)))
    z1 = s1 + rng.normal(0.0, noise, size=(n, d))
    z2 = s2 + rng.normal(0.0, noise, size=(n, d))

    if prior_kind == "generalizing":
        post = _posteriors_generalizing_batch(z1, z2, sigma2, d)
    else:
        post = _posteriors_memorizing_batch(z1, z2, pool, sigma2)

    p = float(np.mean((post >= 0.5) == r))
    return McAccuracy(accuracy=p, stderr95=1.96 * math.sqrt(p * (1 - p) / n), n=n)
