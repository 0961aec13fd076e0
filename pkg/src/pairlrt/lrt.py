"""Likelihood-ratio statistics, reference-distribution dispatch, and p-values.

Which reference applies depends on the model, the null kind, and whether the
analysis treats the constrained block as fixed or growing with n:

  graph model, specified, fixed        chi-square, df = r
  graph model, homogeneous, fixed      chi-square, df = r - 1
  graph model, any, growing            centered normal, chi-square(r) surrogate
  comparisons, any, growing            centered normal, chi-square(r) surrogate
  comparisons, homogeneous, fixed      chi-square, df = r - 2 (needs r > 2)
  comparisons, specified, fixed        parametric bootstrap (no asymptotic law)

The growing regime centers at r and scales by sqrt(2r) for both models; the
default p-value still comes from the chi-square(r) surrogate, which behaves
better at realistic sizes, and the normal p-value rides along in the report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.special import chdtri, gammainc, gammaincc, ndtr, ndtri

from . import beta_model, bt_model
from .core import (
    ComparisonTable,
    NonexistentMLEError,
    NullHypothesis,
    UndirectedGraph,
)

REGIMES = ("fixed", "growing")
DEFAULT_BOOTSTRAP_B = 999


@dataclass(frozen=True)
class ChiSquare:
    df: int

    def to_dict(self) -> dict:
        return {"type": "chi_square", "df": self.df}


@dataclass(frozen=True)
class NormalizedGaussian:
    def to_dict(self) -> dict:
        return {"type": "normalized_gaussian"}


@dataclass(frozen=True)
class Bootstrap:
    B: int = DEFAULT_BOOTSTRAP_B

    def to_dict(self) -> dict:
        return {"type": "bootstrap", "B": self.B}


Reference = Union[ChiSquare, NormalizedGaussian, Bootstrap]


def chi_square_cdf(x: float, df: int) -> float:
    if x < 0:
        raise ValueError("chi-square CDF needs x >= 0")
    if df < 1:
        raise ValueError("df must be a positive integer")
    return float(gammainc(df / 2.0, x / 2.0))


def chi_square_sf(x: float, df: int) -> float:
    if x < 0:
        raise ValueError("chi-square tail needs x >= 0")
    if df < 1:
        raise ValueError("df must be a positive integer")
    return float(gammaincc(df / 2.0, x / 2.0))


def chi_square_quantile(q: float, df: int) -> float:
    if not 0.0 < q < 1.0:
        raise ValueError("quantile level must be inside (0, 1)")
    return float(chdtri(df, 1.0 - q))


def normal_cdf(z: float) -> float:
    if not math.isfinite(z):
        raise ValueError("normal CDF needs finite input")
    return float(ndtr(z))


def normal_quantile(q: float) -> float:
    if not 0.0 < q < 1.0:
        raise ValueError("quantile level must be inside (0, 1)")
    return float(ndtri(q))


def constraint_count(model: str, null: NullHypothesis) -> int:
    """Number of free parameters removed by the null."""
    if model == "beta":
        return null.r if null.kind == "specified" else null.r - 1
    return null.r - 1 if null.kind == "specified" else null.r - 2


def reference_distribution(model: str, null: NullHypothesis, regime: str) -> Reference:
    """Pick the reference law for the statistic.

    Raises ValueError for combinations with no usable reference: r=0 nulls,
    single-element homogeneous ties, and comparison-model homogeneous nulls
    with r <= 2 in the fixed regime.
    """
    if model not in ("beta", "bt"):
        raise ValueError(f"unknown model {model!r}")
    if regime not in REGIMES:
        raise ValueError(f"regime must be one of {REGIMES}")
    if null.r == 0:
        raise ValueError("null with r=0 constrains nothing; there is no test")
    if regime == "growing":
        return NormalizedGaussian()
    if model == "beta":
        df = null.r if null.kind == "specified" else null.r - 1
        if df < 1:
            raise ValueError("homogeneous null needs r >= 2 to constrain anything")
        return ChiSquare(df)
    if null.kind == "homogeneous":
        if null.r <= 2:
            raise ValueError("comparison-model homogeneous test needs r > 2")
        return ChiSquare(null.r - 2)
    return Bootstrap()


def lrt_statistic(full, restricted) -> float:
    """Twice the log-likelihood gap, clamped to zero within rounding slack."""
    if not (full.exists and restricted.exists):
        raise NonexistentMLEError(
            "likelihood-ratio statistic undefined: maximizer does not exist",
            exists_full=full.exists,
            exists_null=restricted.exists,
        )
    if not (full.converged and restricted.converged):
        raise RuntimeError("likelihood-ratio statistic from non-converged fits")
    stat = 2.0 * (full.loglik - restricted.loglik)
    # nested fits at score tolerance 1e-8 can disagree by ~1e-8 on flat
    # likelihoods; only a gap beyond that is a solver failure
    if stat < -1e-6:
        raise RuntimeError(f"negative likelihood-ratio statistic {stat:.3e}")
    return max(stat, 0.0)


@dataclass
class TestReport:
    model: str
    null: NullHypothesis
    stat: float
    reference: Optional[Reference]
    normalized_stat: Optional[float]
    p_value: Optional[float]
    exists_full: bool
    exists_null: bool
    warnings: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "model": self.model,
            "null": self.null.to_dict(),
            "stat": self.stat,
            "reference": self.reference.to_dict() if self.reference is not None else None,
            "exists_full": self.exists_full,
            "exists_null": self.exists_null,
            "warnings": list(self.warnings),
            "fits": self.fits,
            "diagnostics": self.diagnostics,
        }
        if self.normalized_stat is not None:
            out["normalized_stat"] = self.normalized_stat
        if self.p_value is not None:
            out["p_value"] = self.p_value
        return out


def _normalized(stat: float, center: float) -> float:
    return (stat - center) / math.sqrt(2.0 * center)


def bootstrap_distribution(
    table: ComparisonTable,
    null: NullHypothesis,
    beta_null: np.ndarray,
    B: int,
    rng: np.random.Generator,
    tol: float,
) -> tuple[list, int]:
    """Simulate B tables from the restricted fit; return existing statistics and B."""
    totals = table.totals
    stats = []
    for child in rng.spawn(B):
        boot = bt_model.simulate_comparisons(beta_null, totals, child)
        full_b = bt_model.bt_fit_mle(boot, tol=tol)
        if not full_b.exists:
            continue
        restr_b = bt_model.bt_fit_restricted(boot, null, tol=tol)
        if not restr_b.exists:
            continue
        stats.append(lrt_statistic(full_b, restr_b))
    return stats, B


def bootstrap_pvalue(
    table: ComparisonTable,
    null: NullHypothesis,
    B: int = DEFAULT_BOOTSTRAP_B,
    rng: Optional[np.random.Generator] = None,
    *,
    tol: float = 1e-8,
) -> float:
    """Parametric bootstrap p-value for the comparison-model specified null.

    Fits the restricted model, simulates B tables from it with the observed
    pair totals, and returns (1 + #{bootstrap stat >= observed}) over
    (#usable + 1).  Replicates whose maximizer fails to exist are dropped;
    losing more than half of them is an error.
    """
    if null.kind != "specified":
        raise ValueError("bootstrap reference applies to specified nulls only")
    if rng is None:
        rng = np.random.default_rng(0)
    full = bt_model.bt_fit_mle(table, tol=tol)
    restr = bt_model.bt_fit_restricted(table, null, tol=tol)
    observed = lrt_statistic(full, restr)
    stats, total = bootstrap_distribution(table, null, restr.beta_hat, B, rng, tol)
    if len(stats) < total / 2:
        raise RuntimeError(
            f"only {len(stats)} of {total} bootstrap replicates had existing maximizers"
        )
    exceed = sum(1 for s in stats if s >= observed)
    return (1.0 + exceed) / (len(stats) + 1.0)


def run_test(
    data: Union[UndirectedGraph, ComparisonTable],
    null: NullHypothesis,
    regime: str,
    *,
    bootstrap_reps: int = DEFAULT_BOOTSTRAP_B,
    rng: Optional[np.random.Generator] = None,
    tol: float = 1e-8,
) -> TestReport:
    """Fit the full and restricted models and assemble the test report.

    Nonexistent maximizers surface as NonexistentMLEError so simulation
    drivers can tally them; every returned report therefore has both
    existence flags true.
    """
    if isinstance(data, UndirectedGraph):
        model = "beta"
    elif isinstance(data, ComparisonTable):
        model = "bt"
    else:
        raise TypeError(f"unsupported data type {type(data).__name__}")
    null.validate_for(model, data.n)
    reference = reference_distribution(model, null, regime)

    if model == "beta":
        full = beta_model.fit_mle(data, tol=tol)
        if null.kind == "specified":
            restricted = beta_model.fit_restricted_specified(data, null, tol=tol)
        else:
            restricted = beta_model.fit_restricted_homogeneous(data, null.r, tol=tol)
    else:
        full = bt_model.bt_fit_mle(data, tol=tol)
        restricted = bt_model.bt_fit_restricted(data, null, tol=tol)
    stat = lrt_statistic(full, restricted)

    warnings: list = []
    diagnostics: dict = {}
    normalized_stat: Optional[float] = None
    r = null.r
    if regime == "growing":
        normalized_stat = _normalized(stat, float(r))
        p_normal = normal_cdf(-normalized_stat)
        p_surrogate = chi_square_sf(stat, r)
        p_value = p_surrogate
        diagnostics["p_value_normal"] = p_normal
        diagnostics["p_value_chi_square"] = p_surrogate
        diagnostics["surrogate_df"] = r
        k = constraint_count(model, null)
        if k != r and k >= 1:
            z_alt = _normalized(stat, float(k))
            diagnostics["alt_center"] = k
            diagnostics["normalized_stat_alt"] = z_alt
            diagnostics["p_value_normal_alt"] = normal_cdf(-z_alt)
        if r < math.log(data.n) ** 2:
            warnings.append(
                f"growing-regime approximation is doubtful: r={r} is below (log n)^2={math.log(data.n) ** 2:.1f}"
            )
    elif isinstance(reference, ChiSquare):
        p_value = chi_square_sf(stat, reference.df)
    else:
        warnings.append(
            "no asymptotic reference for a fixed specified null in the comparison model; "
            "using a parametric bootstrap"
        )
        if rng is None:
            rng = np.random.default_rng(0)
        reference = Bootstrap(bootstrap_reps)
        stats, total = bootstrap_distribution(
            data, null, restricted.beta_hat, bootstrap_reps, rng, tol
        )
        if len(stats) < total / 2:
            raise RuntimeError(
                f"only {len(stats)} of {total} bootstrap replicates had existing maximizers"
            )
        if len(stats) < total:
            warnings.append(f"dropped {total - len(stats)} bootstrap replicates with nonexistent maximizers")
        exceed = sum(1 for s in stats if s >= stat)
        p_value = (1.0 + exceed) / (len(stats) + 1.0)
        diagnostics["bootstrap_used"] = len(stats)

    return TestReport(
        model=model,
        null=null,
        stat=stat,
        reference=reference,
        normalized_stat=normalized_stat,
        p_value=p_value,
        exists_full=True,
        exists_null=True,
        warnings=warnings,
        fits={"full": full.summary(), "null": restricted.summary()},
        diagnostics=diagnostics,
    )
