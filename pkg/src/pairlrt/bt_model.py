"""Paired-comparison model with merit parameters on a reference scale.

Subject i beats subject j in a single comparison with probability
expit(b_i - b_j); the k_ij comparisons of a pair are independent.  The first
subject is the reference and its parameter is fixed at zero, so fits move
n-1 free coordinates.  The maximizer exists exactly when the directed win
graph is strongly connected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.special import expit

from .core import ComparisonTable, NullHypothesis, as_model_params

TOL_SCORE = 1e-8
MAX_MINORIZE = 500
MAX_NEWTON = 100
DIVERGENCE_CAP = 40.0


def _pair_diffs(beta: np.ndarray) -> np.ndarray:
    return beta[:, None] - beta[None, :]


def win_probabilities(beta) -> np.ndarray:
    """Matrix of single-comparison win probabilities expit(b_i - b_j), zero diagonal."""
    b = as_model_params(beta, "bt")
    p = expit(_pair_diffs(b))
    np.fill_diagonal(p, 0.0)
    return p


def bt_log_likelihood(beta, table: ComparisonTable) -> float:
    b = as_model_params(beta, "bt")
    if b.size != table.n:
        raise ValueError(f"parameter length {b.size} does not match n={table.n}")
    iu = np.triu_indices(table.n, k=1)
    k = table.totals[iu].astype(float)
    pairs = np.logaddexp(b[:, None], b[None, :])[iu]
    return float(b @ table.degrees - k @ pairs)


def bt_expected_wins(beta, table: ComparisonTable) -> np.ndarray:
    b = as_model_params(beta, "bt")
    p = expit(_pair_diffs(b))
    np.fill_diagonal(p, 0.0)
    return (table.totals * p).sum(axis=1)


def bt_score(beta, table: ComparisonTable) -> np.ndarray:
    """Gradient in the free coordinates (subjects 2..n)."""
    b = as_model_params(beta, "bt")
    if b.size != table.n:
        raise ValueError(f"parameter length {b.size} does not match n={table.n}")
    return (table.degrees - bt_expected_wins(b, table))[1:]


def _weighted_variances(beta: np.ndarray, table: ComparisonTable) -> np.ndarray:
    d = _pair_diffs(beta)
    w = table.totals * expit(d) * expit(-d)
    np.fill_diagonal(w, 0.0)
    return w


def bt_fisher_info(beta, table: ComparisonTable) -> np.ndarray:
    """Information matrix for the free coordinates.

    Off-diagonal (i, j) holds -k_ij v_ij; the diagonal sums k_ij v_ij over
    every opponent including the reference subject.
    """
    b = as_model_params(beta, "bt")
    if b.size != table.n:
        raise ValueError(f"parameter length {b.size} does not match n={table.n}")
    w = _weighted_variances(b, table)
    full = -w
    np.fill_diagonal(full, w.sum(axis=1))
    return full[1:, 1:]


def bt_bn_cn(beta) -> tuple[float, float]:
    """Reciprocal variance extremes over pairs, driven by |b_i - b_j|."""
    b = as_model_params(beta, "bt")
    if b.size < 2:
        raise ValueError("need at least two parameters")
    iu = np.triu_indices(b.size, k=1)
    x = np.abs(_pair_diffs(b)[iu])
    return 2.0 + 2.0 * math.cosh(float(x.max())), 2.0 + 2.0 * math.cosh(float(x.min()))


def strongly_connected(table: ComparisonTable) -> bool:
    """True when the directed graph with an arc i -> j for each win is strongly connected."""
    adj = csr_matrix((table.wins > 0).astype(np.int8))
    ncomp, _ = connected_components(adj, directed=True, connection="strong")
    return int(ncomp) == 1


@dataclass(frozen=True)
class BTFit:
    """Fit result on the reference scale; beta_hat[0] is always 0."""

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


def _bt_nonexistent(beta: np.ndarray, iterations: int = 0) -> BTFit:
    return BTFit(beta.copy(), float("nan"), iterations, False, False, float("inf"))


def _bt_saturated(beta: np.ndarray, table: ComparisonTable, tol: float) -> bool:
    # a compared pair whose merit difference reaches -log(tol) leaves a win
    # residual the score test cannot tell from zero; a tied block escaping
    # jointly stalls there without tripping the coordinate cap
    iu = np.triu_indices(beta.size, k=1)
    active = table.totals[iu] > 0
    if not np.any(active):
        return False
    return bool(np.abs(_pair_diffs(beta)[iu][active]).max() >= -math.log(tol))


def _bt_newton_reduced(
    table: ComparisonTable,
    base: np.ndarray,
    J: np.ndarray,
    theta: np.ndarray,
    *,
    tol: float,
    max_iter: int,
    cap: float,
    start_iterations: int,
) -> BTFit:
    """Damped Newton ascent over beta = base + J_pad @ theta with beta[0] = 0.

    J maps theta to the free coordinates 1..n-1; base[0] must be 0.
    """
    d = table.degrees
    n = table.n

    def expand(th: np.ndarray) -> np.ndarray:
        beta = base.copy()
        beta[1:] += J @ th
        return beta

    beta = expand(theta)
    ll = bt_log_likelihood(beta, table)
    s = J.T @ (d - bt_expected_wins(beta, table))[1:]
    gnorm = float(np.abs(s).max()) if s.size else 0.0
    iters = start_iterations
    for _ in range(max_iter):
        if gnorm <= tol:
            if _bt_saturated(beta, table, tol):
                return _bt_nonexistent(beta, iters)
            return BTFit(beta, ll, iters, True, True, gnorm)
        H = J.T @ bt_fisher_info(beta, table) @ J
        try:
            delta = np.linalg.solve(H, s)
        except np.linalg.LinAlgError:
            break
        step = 1.0
        accepted = False
        for _ in range(30):
            cand_theta = theta + step * delta
            if np.abs(cand_theta).max() <= cap:
                cand_beta = expand(cand_theta)
                cand_ll = bt_log_likelihood(cand_beta, table)
                cand_s = J.T @ (d - bt_expected_wins(cand_beta, table))[1:]
                cand_gnorm = float(np.abs(cand_s).max())
                if cand_ll > ll or cand_gnorm < gnorm:
                    theta, beta, ll = cand_theta, cand_beta, cand_ll
                    s, gnorm = cand_s, cand_gnorm
                    accepted = True
                    break
            step *= 0.5
        iters += 1
        if not accepted:
            break
        if np.abs(theta).max() > cap:
            return _bt_nonexistent(beta, iters)
    if gnorm <= tol and _bt_saturated(beta, table, tol):
        return _bt_nonexistent(beta, iters)
    return BTFit(beta, ll, iters, gnorm <= tol, True, gnorm)


def bt_fit_mle(table: ComparisonTable, *, tol: float = TOL_SCORE, init=None) -> BTFit:
    """Fit the n-1 free merit parameters.

    Existence is decided up front by strong connectivity.  The solver runs
    the minorization update (each merit is rescaled by observed over expected
    wins, then the reference is re-zeroed) to a loose residual and finishes
    with Newton steps.
    """
    n = table.n
    if not strongly_connected(table):
        return _bt_nonexistent(np.zeros(n))
    d = table.degrees.astype(float)
    beta = np.zeros(n) if init is None else as_model_params(init, "bt").copy()
    target = max(tol, 1e-2)
    mm_iters = 0
    for mm_iters in range(1, MAX_MINORIZE + 1):
        ew = bt_expected_wins(beta, table)
        if np.abs(d - ew)[1:].max() <= target:
            mm_iters -= 1
            break
        beta = beta + np.log(d) - np.log(ew)
        beta = beta - beta[0]
        if np.abs(beta).max() > DIVERGENCE_CAP:
            return _bt_nonexistent(beta, mm_iters)
    J = np.eye(n - 1)
    return _bt_newton_reduced(
        table,
        np.zeros(n),
        J,
        beta[1:],
        tol=tol,
        max_iter=MAX_NEWTON,
        cap=DIVERGENCE_CAP,
        start_iterations=mm_iters,
    )


def bt_fit_restricted(table: ComparisonTable, null: NullHypothesis, *, tol: float = TOL_SCORE) -> BTFit:
    """Fit under a null constraint on subjects 1..r.

    Specified nulls pin subjects 2..r to given offsets from the reference;
    homogeneous nulls tie subjects 1..r to the reference's level, leaving a
    single common value fixed at zero by the normalization.
    """
    null.validate_for("bt", table.n)
    n = table.n
    r = null.r
    d = table.degrees
    k_row = table.totals.sum(axis=1)
    if null.kind == "specified":
        base = np.zeros(n)
        base[1:r] = null.values
        if r == n:
            return BTFit(base, bt_log_likelihood(base, table), 0, True, True, 0.0)
        free = np.arange(r, n)
        if np.any(d[free] == 0) or np.any(d[free] == k_row[free]):
            return _bt_nonexistent(base)
        J = np.zeros((n - 1, n - r))
        J[free - 1, np.arange(n - r)] = 1.0
        return _bt_newton_reduced(
            table, base, J, np.zeros(n - r), tol=tol,
            max_iter=MAX_NEWTON, cap=DIVERGENCE_CAP, start_iterations=0,
        )
    # Homogeneous: subjects 1..r-1 (everyone in the block except the
    # reference) share one unknown level.  The reduced parameters are that
    # level plus the tail.  Cross-block win totals decide existence for the
    # block's shared coordinate.
    tied = np.arange(1, r)
    outside = np.concatenate(([0], np.arange(r, n)))
    if r < n:
        free = np.arange(r, n)
        if np.any(d[free] == 0) or np.any(d[free] == k_row[free]):
            return _bt_nonexistent(np.zeros(n))
    cross_total = int(table.totals[np.ix_(tied, outside)].sum())
    cross_wins = int(table.wins[np.ix_(tied, outside)].sum())
    if cross_total > 0 and cross_wins in (0, cross_total):
        return _bt_nonexistent(np.zeros(n))
    m = 1 + (n - r)
    J = np.zeros((n - 1, m))
    J[tied - 1, 0] = 1.0
    if r < n:
        J[np.arange(r, n) - 1, np.arange(1, m)] = 1.0
    return _bt_newton_reduced(
        table, np.zeros(n), J, np.zeros(m), tol=tol,
        max_iter=MAX_NEWTON, cap=DIVERGENCE_CAP, start_iterations=0,
    )


def simulate_comparisons(beta, k, rng: np.random.Generator) -> ComparisonTable:
    """Draw win counts for every pair with totals k (a scalar or a symmetric matrix)."""
    b = as_model_params(beta, "bt")
    n = b.size
    if n < 3:
        raise ValueError("need at least three subjects")
    if np.isscalar(k):
        kk = int(k)
        if kk < 0:
            raise ValueError("comparison count must be nonnegative")
        totals = np.full((n, n), kk, dtype=np.int64)
        np.fill_diagonal(totals, 0)
    else:
        totals = np.asarray(k)
        if totals.shape != (n, n):
            raise ValueError("totals matrix shape must match the parameter length")
        if not np.array_equal(totals, totals.T) or np.any(totals < 0):
            raise ValueError("totals must be symmetric and nonnegative")
        totals = totals.astype(np.int64)
        np.fill_diagonal(totals, 0)
    iu = np.triu_indices(n, k=1)
    p = expit(_pair_diffs(b)[iu])
    upper = rng.binomial(totals[iu], p)
    wins = np.zeros((n, n), dtype=np.int64)
    wins[iu] = upper
    wins.T[iu] = totals[iu] - upper
    return ComparisonTable(wins)
