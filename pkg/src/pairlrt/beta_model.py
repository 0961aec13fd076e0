"""Degree-parameter random graph model.

Each node i carries a real parameter b_i and edge {i, j} appears
independently with probability expit(b_i + b_j).  The degree sequence is
sufficient, and the maximum-likelihood equations match observed degrees to
their expectations.  The maximizer fails to exist for boundary degree
sequences; fits report that instead of returning a spurious vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit

from .core import NullHypothesis, UndirectedGraph, as_model_params

TOL_SCORE = 1e-8
MAX_FIXED_POINT = 500
MAX_NEWTON = 100
DIVERGENCE_CAP = 40.0


def _pair_logits(beta: np.ndarray) -> np.ndarray:
    return beta[:, None] + beta[None, :]


def edge_probabilities(beta) -> np.ndarray:
    """Matrix of edge probabilities expit(b_i + b_j), zero diagonal."""
    b = as_model_params(beta, "beta")
    p = expit(_pair_logits(b))
    np.fill_diagonal(p, 0.0)
    return p


def interaction_variances(beta) -> np.ndarray:
    """Matrix of per-pair Bernoulli variances p_ij (1 - p_ij), zero diagonal."""
    b = as_model_params(beta, "beta")
    pi = _pair_logits(b)
    w = expit(pi) * expit(-pi)
    np.fill_diagonal(w, 0.0)
    return w


def log_likelihood(beta, g: UndirectedGraph) -> float:
    b = as_model_params(beta, "beta")
    if b.size != g.n:
        raise ValueError(f"parameter length {b.size} does not match n={g.n}")
    iu = np.triu_indices(g.n, k=1)
    return float(b @ g.degrees - np.logaddexp(0.0, _pair_logits(b)[iu]).sum())


def expected_degrees(beta) -> np.ndarray:
    return edge_probabilities(beta).sum(axis=1)


def score(beta, g: UndirectedGraph) -> np.ndarray:
    """Gradient of the log-likelihood: observed minus expected degrees."""
    b = as_model_params(beta, "beta")
    if b.size != g.n:
        raise ValueError(f"parameter length {b.size} does not match n={g.n}")
    return g.degrees - expected_degrees(b)


def fisher_info(beta, n: Optional[int] = None) -> np.ndarray:
    """Covariance matrix of the degree sequence.

    Off-diagonal entries are the pair variances; each diagonal entry is the
    row sum of the others, so the result is diagonally balanced.
    """
    b = as_model_params(beta, "beta")
    if n is not None and n != b.size:
        raise ValueError(f"n={n} does not match parameter length {b.size}")
    v = interaction_variances(b)
    np.fill_diagonal(v, v.sum(axis=1))
    return v


@dataclass(frozen=True)
class ModelDiagnostics:
    """Curvature extremes of the pair variances and the implied consistency radius."""

    b_n: float
    c_n: float
    consistency_radius: float


def bn_cn(beta) -> ModelDiagnostics:
    """Reciprocal pair-variance extremes b_n >= c_n >= 4.

    For a pair with logit x the reciprocal variance is (1+e^x)^2/e^x, which
    equals 2 + 2 cosh(x) and grows with |x|.  The paired-comparison analogue
    uses parameter differences; see bt_model.bt_bn_cn.
    """
    b = as_model_params(beta, "beta")
    n = b.size
    if n < 2:
        raise ValueError("need at least two parameters")
    iu = np.triu_indices(n, k=1)
    x = np.abs(_pair_logits(b)[iu])
    b_n = 2.0 + 2.0 * math.cosh(float(x.max()))
    c_n = 2.0 + 2.0 * math.cosh(float(x.min()))
    radius = 3.0 * n * b_n / (2.0 * n - 1.0) * math.sqrt(math.log(n) / n)
    return ModelDiagnostics(b_n=b_n, c_n=c_n, consistency_radius=radius)


@dataclass(frozen=True)
class BetaFit:
    """Result of a maximum-likelihood fit.

    gradient_norm is the max-abs entry of the score in the fitted (possibly
    reduced) coordinates.  When exists is false, beta_hat holds the last
    iterate and loglik is NaN.
    """

    beta_hat: np.ndarray
    loglik: float
    iterations: int
    converged: bool
    exists: bool
    gradient_norm: float

    def summary(self) -> dict:
        return {
            "loglik": self.loglik,
            "iterations": self.iterations,
            "converged": self.converged,
            "exists": self.exists,
            "gradient_norm": self.gradient_norm,
        }


def _nonexistent(beta: np.ndarray, iterations: int = 0) -> BetaFit:
    return BetaFit(
        beta_hat=beta.copy(),
        loglik=float("nan"),
        iterations=iterations,
        converged=False,
        exists=False,
        gradient_norm=float("inf"),
    )


def _saturated(beta: np.ndarray, tol: float) -> bool:
    # a pair logit at -log(tol) leaves a residual of about tol, which the
    # score test cannot tell from zero, so the point cannot be certified as
    # an interior maximizer; joint escape directions stall exactly there
    iu = np.triu_indices(beta.size, k=1)
    return bool(np.abs(_pair_logits(beta)[iu]).max() >= -math.log(tol))


def _fixed_point(
    d: np.ndarray,
    beta: np.ndarray,
    free: np.ndarray,
    *,
    target: float,
    max_iter: int,
    cap: float,
) -> tuple[np.ndarray, int, bool]:
    """Multiplicative degree-matching updates on the free coordinates.

    Returns (beta, iterations, diverged).  The update adds
    log(d_i / Ed_i(beta)) to each free coordinate, which is the classical
    per-node fixed-point map written in increment form.
    """
    it = 0
    for it in range(1, max_iter + 1):
        ed = expected_degrees(beta)
        resid = np.abs(d[free] - ed[free])
        if resid.size == 0 or resid.max() <= target:
            return beta, it - 1, False
        beta = beta.copy()
        beta[free] += np.log(d[free]) - np.log(ed[free])
        if np.abs(beta[free]).max() > cap:
            return beta, it, True
    return beta, it, False


def _newton_reduced(
    g: UndirectedGraph,
    base: np.ndarray,
    J: np.ndarray,
    theta: np.ndarray,
    *,
    tol: float,
    max_iter: int,
    cap: float,
    start_iterations: int,
) -> BetaFit:
    """Damped Newton ascent over beta = base + J @ theta."""
    d = g.degrees
    beta = base + J @ theta
    ll = log_likelihood(beta, g)
    s = J.T @ (d - expected_degrees(beta))
    gnorm = float(np.abs(s).max()) if s.size else 0.0
    iters = start_iterations
    for _ in range(max_iter):
        if gnorm <= tol:
            if _saturated(beta, tol):
                return _nonexistent(beta, iters)
            return BetaFit(beta, ll, iters, True, True, gnorm)
        V = fisher_info(beta)
        H = J.T @ V @ J
        try:
            delta = np.linalg.solve(H, s)
        except np.linalg.LinAlgError:
            break
        step = 1.0
        accepted = False
        for _ in range(30):
            cand_theta = theta + step * delta
            cand_beta = base + J @ cand_theta
            if np.abs(cand_theta).max() <= cap:
                cand_ll = log_likelihood(cand_beta, g)
                cand_s = J.T @ (d - expected_degrees(cand_beta))
                cand_gnorm = float(np.abs(cand_s).max())
                if cand_ll > ll or cand_gnorm < gnorm:
                    theta, beta, ll, s, gnorm = cand_theta, cand_beta, cand_ll, cand_s, cand_gnorm
                    accepted = True
                    break
            step *= 0.5
        iters += 1
        if not accepted:
            break
        if np.abs(theta).max() > cap:
            return _nonexistent(beta, iters)
    converged = gnorm <= tol
    if converged and _saturated(beta, tol):
        return _nonexistent(beta, iters)
    return BetaFit(beta, ll, iters, converged, True, gnorm)


def fit_mle(g: UndirectedGraph, *, tol: float = TOL_SCORE) -> BetaFit:
    """Fit all n parameters.

    Runs the fixed-point map to a loose residual, then Newton steps on the
    full score to tol.  A degree of 0 or n-1 means the maximizer does not
    exist and is reported without iterating.
    """
    d = g.degrees
    n = g.n
    if np.any(d == 0) or np.any(d == n - 1):
        return _nonexistent(np.zeros(n))
    free = np.arange(n)
    beta, fp_iters, diverged = _fixed_point(
        d, np.zeros(n), free, target=max(tol, 1e-2), max_iter=MAX_FIXED_POINT, cap=DIVERGENCE_CAP
    )
    if diverged:
        return _nonexistent(beta, fp_iters)
    return _newton_reduced(
        g,
        np.zeros(n),
        np.eye(n),
        beta,
        tol=tol,
        max_iter=MAX_NEWTON,
        cap=DIVERGENCE_CAP,
        start_iterations=fp_iters,
    )


def fit_restricted_specified(g: UndirectedGraph, null: NullHypothesis, *, tol: float = TOL_SCORE) -> BetaFit:
    """Fit with the first r parameters pinned to the null values."""
    if null.kind != "specified":
        raise ValueError("null must be of the specified kind")
    null.validate_for("beta", g.n)
    n = g.n
    r = null.r
    if r == 0:
        return fit_mle(g, tol=tol)
    d = g.degrees
    base = np.zeros(n)
    base[:r] = null.values
    if r == n:
        return BetaFit(base, log_likelihood(base, g), 0, True, True, 0.0)
    free = np.arange(r, n)
    if np.any(d[free] == 0) or np.any(d[free] == n - 1):
        return _nonexistent(base)
    beta, fp_iters, diverged = _fixed_point(
        d, base.copy(), free, target=max(tol, 1e-2), max_iter=MAX_FIXED_POINT, cap=DIVERGENCE_CAP
    )
    if diverged:
        return _nonexistent(beta, fp_iters)
    J = np.zeros((n, n - r))
    J[free, np.arange(n - r)] = 1.0
    return _newton_reduced(
        g,
        base,
        J,
        beta[free] ,
        tol=tol,
        max_iter=MAX_NEWTON,
        cap=DIVERGENCE_CAP,
        start_iterations=fp_iters,
    )


def fit_restricted_homogeneous(g: UndirectedGraph, r: int, *, tol: float = TOL_SCORE) -> BetaFit:
    """Fit with the first r parameters tied to a common unknown value."""
    if not 1 <= r <= g.n:
        raise ValueError(f"r must be in [1, {g.n}], got {r}")
    n = g.n
    d = g.degrees
    block = int(d[:r].sum())
    if block == 0 or block == r * (n - 1):
        return _nonexistent(np.zeros(n))
    if r < n:
        tail = np.arange(r, n)
        if np.any(d[tail] == 0) or np.any(d[tail] == n - 1):
            return _nonexistent(np.zeros(n))
    m = n - r + 1
    J = np.zeros((n, m))
    J[:r, 0] = 1.0
    if r < n:
        J[np.arange(r, n), np.arange(1, m)] = 1.0
    return _newton_reduced(
        g,
        np.zeros(n),
        J,
        np.zeros(m),
        tol=tol,
        max_iter=MAX_NEWTON,
        cap=DIVERGENCE_CAP,
        start_iterations=0,
    )


def simulate_graph(beta, rng: np.random.Generator) -> UndirectedGraph:
    """Draw one graph with independent edges at probabilities expit(b_i + b_j)."""
    b = as_model_params(beta, "beta")
    n = b.size
    if n < 3:
        raise ValueError("need at least three nodes")
    iu = np.triu_indices(n, k=1)
    p = expit(_pair_logits(b)[iu])
    draws = rng.random(p.size) < p
    adj = np.zeros((n, n), dtype=np.int8)
    adj[iu] = draws
    adj += adj.T
    return UndirectedGraph(adj)
