"""Fisher information of the homodyne outcome distribution in (g1, g2).

Three routes are implemented and cross-validated:

* ``fisher_analytic``: the zero-mean Gaussian identity
  F_ij = tr(V^-1 dV_i V^-1 dV_j) / 2, exact at any squeezing level;
* ``fisher_monte_carlo``: sample outcomes, evaluate the analytic score per draw,
  average the outer products, and report elementwise standard errors;
* ``fisher_limit_closed_form``: the zero-squeezing and infinite-squeezing limit
  matrices, used as oracles for the analytic route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ValidationError, _check_positive_definite
from .interferometer import InterferometerConfig, reduced_covariance_closed

PSD_FLOOR = -1e-9

#: samples drawn per chunk; fixed so results are a function of (seed, samples) only
MC_CHUNK = 1 << 16

MIN_MC_SAMPLES = 1000

LIMIT_ZERO = "zero"
LIMIT_INFINITY = "infinity"


@dataclass(frozen=True, eq=False)
class FisherMatrix:
    """Symmetric positive-semidefinite 2x2 information matrix over (g1, g2)."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=float)
        if m.shape != (2, 2):
            raise ValidationError(f"Fisher matrix must be 2x2, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("Fisher matrix entries must be finite")
        if abs(m[0, 1] - m[1, 0]) > 1e-12 * max(1.0, float(np.max(np.abs(m)))):
            raise ValidationError("Fisher matrix must be symmetric")
        scale = float(np.max(np.abs(m)))
        if float(np.linalg.eigvalsh(m)[0]) < PSD_FLOOR * max(1.0, scale):
            raise ValidationError("Fisher matrix must be positive semidefinite")
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)

    @property
    def trace_norm(self) -> float:
        """Sum of absolute eigenvalues; equals the trace for PSD matrices."""
        return float(np.sum(np.abs(np.linalg.eigvalsh(self.entries))))


@dataclass(frozen=True)
class ScoreVector:
    """Gradient of the outcome log density with respect to (g1, g2) at one outcome."""

    d_g1: float
    d_g2: float


@dataclass(frozen=True, eq=False)
class MonteCarloFisher:
    """Monte Carlo Fisher estimate with elementwise standard errors.

    ``score_mean`` and ``score_se`` expose the per-component sample mean of the
    score and its standard error (the score has zero mean in truth).
    """

    fisher: FisherMatrix
    standard_error: np.ndarray
    score_mean: np.ndarray
    score_se: np.ndarray
    samples: int
    seed: int


def dv_dg(cfg: InterferometerConfig) -> tuple[np.ndarray, np.ndarray]:
    """Exact derivatives of the measured covariance with respect to g1 and g2.

    Both are constant in (g1, g2, n_bar, theta): eps/2 spread over the slots the
    coherence enters, with the sign pattern of the measured-covariance closed form.
    """
    half_eps = 0.5 * cfg.source.epsilon
    d1 = np.zeros((4, 4))
    d1[0, 2] = d1[2, 0] = half_eps
    d1[1, 3] = d1[3, 1] = half_eps
    d2 = np.zeros((4, 4))
    d2[0, 3] = d2[3, 0] = half_eps
    d2[1, 2] = d2[2, 1] = -half_eps
    return d1, d2


def _score_pieces(cfg: InterferometerConfig):
    """V_r, its Cholesky factor, the quadratic-form kernels, and the trace offsets."""
    v_r = reduced_covariance_closed(cfg)
    _check_positive_definite(v_r.entries, "measured covariance")
    chol = np.linalg.cholesky(v_r.entries)
    d1, d2 = dv_dg(cfg)
    inv = np.linalg.inv(v_r.entries)
    kernels = (inv @ d1 @ inv, inv @ d2 @ inv)
    offsets = (float(np.trace(inv @ d1)), float(np.trace(inv @ d2)))
    return v_r, chol, kernels, offsets


def score_vectors(cfg: InterferometerConfig, outcomes: np.ndarray) -> np.ndarray:
    """Analytic scores d(log P)/d(g1, g2) for each outcome row; shape (n, 2).

    score_i(x) = -tr(V^-1 dV_i)/2 + x^T V^-1 dV_i V^-1 x / 2.
    """
    outcomes = np.asarray(outcomes, dtype=float)
    if outcomes.ndim == 1:
        outcomes = outcomes[None, :]
    if outcomes.shape[1] != 4:
        raise ValidationError(f"outcomes must have 4 columns, got {outcomes.shape}")
    _, _, kernels, offsets = _score_pieces(cfg)
    scores = np.empty((outcomes.shape[0], 2))
    for i, (kernel, offset) in enumerate(zip(kernels, offsets)):
        quad = np.einsum("ni,ij,nj->n", outcomes, kernel, outcomes)
        scores[:, i] = 0.5 * (quad - offset)
    return scores


def score_vector(cfg: InterferometerConfig, outcome: np.ndarray) -> ScoreVector:
    s = score_vectors(cfg, np.asarray(outcome, dtype=float)[None, :])[0]
    return ScoreVector(float(s[0]), float(s[1]))


def fisher_analytic(cfg: InterferometerConfig) -> FisherMatrix:
    """Fisher information from the Gaussian trace identity; exact for any n_bar."""
    v_r = reduced_covariance_closed(cfg)
    _check_positive_definite(v_r.entries, "measured covariance")
    d1, d2 = dv_dg(cfg)
    a1 = np.linalg.solve(v_r.entries, d1)
    a2 = np.linalg.solve(v_r.entries, d2)
    f11 = 0.5 * float(np.trace(a1 @ a1))
    f22 = 0.5 * float(np.trace(a2 @ a2))
    f12 = 0.5 * float(np.trace(a1 @ a2))
    return FisherMatrix(np.array([[f11, f12], [f12, f22]]))


def fisher_monte_carlo(
    cfg: InterferometerConfig, samples: int, seed: int = 0
) -> MonteCarloFisher:
    """Monte Carlo Fisher estimate from ``samples`` homodyne draws.

    Outcomes are drawn from the measured-covariance Gaussian (Cholesky times
    standard normals) in fixed-size chunks from a single seeded generator, so the
    result is a deterministic function of (seed, samples). Reported standard
    errors are the sample standard deviations of the score products over sqrt(n).

    Args:
        cfg: interferometer configuration; the measured covariance must be
            positive definite.
        samples: number of draws, at least 1000.
        seed: RNG seed for ``numpy.random.default_rng``.
    """
    if samples < MIN_MC_SAMPLES:
        raise ValidationError(f"samples must be >= {MIN_MC_SAMPLES}")
    _, chol, kernels, offsets = _score_pieces(cfg)
    rng = np.random.default_rng(seed)

    prod_sum = np.zeros(3)
    prod_sumsq = np.zeros(3)
    score_sum = np.zeros(2)
    score_sumsq = np.zeros(2)
    remaining = samples
    while remaining > 0:
        m = min(MC_CHUNK, remaining)
        remaining -= m
        z = rng.standard_normal((m, 4))
        x = z @ chol.T
        s1 = 0.5 * (np.einsum("ni,ij,nj->n", x, kernels[0], x) - offsets[0])
        s2 = 0.5 * (np.einsum("ni,ij,nj->n", x, kernels[1], x) - offsets[1])
        for k, prod in enumerate((s1 * s1, s1 * s2, s2 * s2)):
            prod_sum[k] += prod.sum()
            prod_sumsq[k] += (prod * prod).sum()
        for k, s in enumerate((s1, s2)):
            score_sum[k] += s.sum()
            score_sumsq[k] += (s * s).sum()

    n = float(samples)
    mean = prod_sum / n
    var = np.maximum(prod_sumsq / n - mean * mean, 0.0) * n / (n - 1.0)
    se = np.sqrt(var / n)
    s_mean = score_sum / n
    s_var = np.maximum(score_sumsq / n - s_mean * s_mean, 0.0) * n / (n - 1.0)

    entries = np.array([[mean[0], mean[1]], [mean[1], mean[2]]])
    se_matrix = np.array([[se[0], se[1]], [se[1], se[2]]])
    return MonteCarloFisher(
        fisher=FisherMatrix(entries),
        standard_error=se_matrix,
        score_mean=s_mean,
        score_se=np.sqrt(s_var / n),
        samples=samples,
        seed=seed,
    )


def fisher_limit_closed_form(
    eps: float, g1: float, g2: float, which: str
) -> FisherMatrix:
    """Closed-form Fisher limit matrices at zero and infinite squeezing.

    ``which`` selects the limit: LIMIT_ZERO ("zero") for n_bar -> 0 or
    LIMIT_INFINITY ("infinity") for n_bar -> infinity.
    """
    if not (math.isfinite(eps) and eps > 0.0):
        raise ValidationError("epsilon must be > 0")
    g_sq = g1 * g1 + g2 * g2
    if g_sq > 1.0 + 1e-12:
        raise ValidationError(f"|g| <= 1 violated (|g|^2={g_sq})")
    eps_sq = eps * eps
    if which == LIMIT_ZERO:
        prefactor = (math.sqrt(2.0) * eps / (4.0 + 4.0 * eps - (g_sq - 1.0) * eps_sq)) ** 2
        base = 4.0 + 4.0 * eps
    elif which == LIMIT_INFINITY:
        prefactor = (eps / (1.0 + 2.0 * eps - (g_sq - 1.0) * eps_sq)) ** 2
        base = 1.0 + 2.0 * eps
    else:
        raise ValidationError(f"unknown limit {which!r}; use {LIMIT_ZERO!r} or {LIMIT_INFINITY!r}")
    diag_plus = base + (1.0 + g1 * g1 - g2 * g2) * eps_sq
    diag_minus = base + (1.0 - g1 * g1 + g2 * g2) * eps_sq
    off = 2.0 * g1 * g2 * eps_sq
    return FisherMatrix(prefactor * np.array([[diag_plus, off], [off, diag_minus]]))
