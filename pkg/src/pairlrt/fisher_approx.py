"""Diagonal approximants for degree-covariance inverses, with certified error bounds.

The degree covariance V of the graph model is diagonally balanced (each
diagonal entry equals its off-diagonal row sum) with off-diagonal entries in
[1/b_n, 1/c_n].  Its inverse is well approximated by the reciprocal-diagonal
matrix S, and the approximation error admits closed-form bounds.  A tied
leading block gets a smaller reduced matrix with the same structure and its
own bound.

Norm conventions: max_abs_error and linf_inverse are entrywise maxima of
absolute values (the largest single entry), not induced operator norms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit

from .beta_model import bn_cn, fisher_info, interaction_variances
from .core import as_model_params


def _mu_prime(x: np.ndarray | float) -> np.ndarray | float:
    return expit(x) * expit(-x)


def inverse_error_bound(b_n: float, c_n: float, n: int) -> float:
    """Entrywise bound on |V^-1 - S| (and the trailing-block analogue)."""
    if n < 3:
        raise ValueError("bound needs n >= 3")
    return 2.0 * b_n**2 / (c_n * (n - 1.0) ** 2) * (n * b_n / (2.0 * (n - 2.0) * c_n) + 0.5)


def tied_inverse_error_bound(b_n: float, c_n: float, n: int) -> float:
    """Entrywise bound on |Vtilde^-1 - Stilde| for the tied-block reduction.

    The trailing block of the reduced inverse shares its error behaviour with
    the untied trailing-block comparison (the tie only adds a rank-one
    correction of smaller order), so the same envelope applies; a smaller
    constant is not attainable, since the trailing diagonal error alone
    reaches 2/((n-1)(n-2)) at the centred parameter point.
    """
    return inverse_error_bound(b_n, c_n, n)


def inverse_entry_window(b_n: float, c_n: float, n: int) -> tuple[float, float]:
    """Lower and upper limits for the largest entry of V^-1."""
    return c_n / (2.0 * (n - 1.0)), 3.0 * b_n / (2.0 * n - 1.0)


@dataclass(frozen=True)
class ApproxReport:
    """Outcome of one approximation check.

    satisfied records max_abs_error <= bound.  linf_inverse is the largest
    entry of the computed inverse and linf_bound its certified ceiling;
    condition is set when the matrix was too ill-conditioned to check.
    """

    max_abs_error: float
    bound: float
    satisfied: bool
    linf_inverse: float
    linf_bound: float
    condition: Optional[float] = None

    def to_dict(self) -> dict:
        out = {
            "max_abs_error": self.max_abs_error,
            "bound": self.bound,
            "satisfied": self.satisfied,
            "linf_inverse": self.linf_inverse,
            "linf_bound": self.linf_bound,
        }
        if self.condition is not None:
            out["condition"] = self.condition
        return out


@dataclass(frozen=True)
class HomogeneousInfo:
    """Reduced information matrix for a leading block tied to a common value.

    The first coordinate aggregates the tied block; the rest are the free
    tail.  S_tilde holds the reciprocal diagonal used as the inverse
    approximant.
    """

    tilde_v11: float
    tilde_v1j: np.ndarray
    V22: np.ndarray
    S_tilde: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        m = 1 + self.V22.shape[0]
        out = np.empty((m, m))
        out[0, 0] = self.tilde_v11
        out[0, 1:] = self.tilde_v1j
        out[1:, 0] = self.tilde_v1j
        out[1:, 1:] = self.V22
        return out


def diag_approx(V: np.ndarray, r: int = 0) -> np.ndarray:
    """Reciprocal diagonal of the trailing block of V starting at index r."""
    V = np.asarray(V, dtype=float)
    n = V.shape[0]
    if not 0 <= r < n:
        raise ValueError(f"block offset must satisfy 0 <= r < {n}")
    d = np.diag(V)[r:]
    if np.any(d == 0):
        raise ValueError("zero diagonal entry")
    return 1.0 / d


def in_matrix_class(V: np.ndarray, m: float, M: float, *, rtol: float = 1e-10) -> bool:
    """Check membership in the balanced class: symmetric, off-diagonals in
    [m, M], each diagonal equal to its off-diagonal row sum."""
    V = np.asarray(V, dtype=float)
    if V.ndim != 2 or V.shape[0] != V.shape[1]:
        return False
    if not np.allclose(V, V.T, rtol=rtol, atol=0.0):
        return False
    off = V[~np.eye(V.shape[0], dtype=bool)]
    slack = rtol * max(abs(m), abs(M), 1.0)
    if off.size and (off.min() < m - slack or off.max() > M + slack):
        return False
    row = V.sum(axis=1) - np.diag(V)
    return bool(np.allclose(np.diag(V), row, rtol=rtol, atol=0.0))


def _safe_inverse(V: np.ndarray) -> tuple[Optional[np.ndarray], Optional[float]]:
    """Dense inverse with a reconstruction sanity check; (None, cond) on failure."""
    n = V.shape[0]
    try:
        inv = np.linalg.solve(V, np.eye(n))
    except np.linalg.LinAlgError:
        return None, float(np.linalg.cond(V))
    recon = float(np.abs(V @ inv - np.eye(n)).max())
    if not np.isfinite(recon) or recon > 1e-9:
        return None, float(np.linalg.cond(V))
    return inv, None


def check_inverse_bound(beta, r: int = 0) -> ApproxReport:
    """Compare the inverses of V and its trailing block against their
    reciprocal-diagonal approximants.

    The reported bound does not depend on r; the measured error is the worse
    of the full and trailing-block comparisons.
    """
    b = as_model_params(beta, "beta")
    n = b.size
    diag = bn_cn(b)
    bound = inverse_error_bound(diag.b_n, diag.c_n, n)
    lo, hi = inverse_entry_window(diag.b_n, diag.c_n, n)
    V = fisher_info(b)
    inv_full, cond = _safe_inverse(V)
    if inv_full is None:
        return ApproxReport(float("inf"), bound, False, float("inf"), hi, condition=cond)
    errors = [float(np.abs(inv_full - np.diag(diag_approx(V, 0))).max())]
    if r > 0:
        inv_block, cond = _safe_inverse(V[r:, r:])
        if inv_block is None:
            return ApproxReport(float("inf"), bound, False, float("inf"), hi, condition=cond)
        errors.append(float(np.abs(inv_block - np.diag(diag_approx(V, r))).max()))
    err = max(errors)
    linf = float(np.abs(inv_full).max())
    return ApproxReport(err, bound, err <= bound, linf, hi)


def build_homogeneous_info(beta, r: int) -> HomogeneousInfo:
    """Assemble the reduced information matrix when the first r parameters are tied."""
    b = as_model_params(beta, "beta")
    n = b.size
    if not 1 <= r <= n:
        raise ValueError(f"r must be in [1, {n}]")
    if not np.all(np.abs(b[:r] - b[0]) <= 1e-12):
        raise ValueError("leading block is not tied")
    gamma = float(b[0])
    tail = b[r:]
    tilde_v1j = r * _mu_prime(gamma + tail)
    tilde_v11 = 2.0 * r * (r - 1) * float(_mu_prime(2.0 * gamma)) + float(tilde_v1j.sum())
    if r < n:
        V22 = fisher_info(b)[r:, r:]
        s_tail = 1.0 / np.diag(V22)
    else:
        V22 = np.zeros((0, 0))
        s_tail = np.zeros(0)
    S_tilde = np.concatenate(([1.0 / tilde_v11], s_tail))
    return HomogeneousInfo(tilde_v11=tilde_v11, tilde_v1j=tilde_v1j, V22=V22, S_tilde=S_tilde)


def check_homogeneous_bound(beta, r: int) -> ApproxReport:
    """Error of the reciprocal-diagonal approximant for the tied-block reduction."""
    b = as_model_params(beta, "beta")
    n = b.size
    info = build_homogeneous_info(b, r)
    diag = bn_cn(b)
    bound = tied_inverse_error_bound(diag.b_n, diag.c_n, n)
    _, hi = inverse_entry_window(diag.b_n, diag.c_n, n)
    M = info.matrix
    inv, cond = _safe_inverse(M)
    if inv is None:
        return ApproxReport(float("inf"), bound, False, float("inf"), hi, condition=cond)
    err = float(np.abs(inv - np.diag(info.S_tilde)).max())
    linf = float(np.abs(inv).max())
    return ApproxReport(err, bound, err <= bound, linf, hi)
