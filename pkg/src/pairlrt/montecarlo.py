"""Simulation scenarios and the replication engine behind the calibration studies.

A Scenario fixes everything a replicate needs: the generating parameters,
the null being tested, the regime, and the seeding.  Per-replicate random
streams come from mixing (master seed, replicate index) through numpy's
SeedSequence, so replicate t is the same draw whether the run uses one
worker or eight, and extending a run leaves earlier replicates unchanged.

Replicates whose maximizer does not exist are tallied separately and left
out of every rejection denominator; the run aborts if they are the majority.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import beta_model, bt_model, lrt
from .core import NonexistentMLEError, NullHypothesis

PRESETS = ("H01", "H02", "H03", "H04", "PowerBeta", "PowerBT", "NBASmall")
DEFAULT_ALPHAS = (0.05, 0.10)


@dataclass(frozen=True)
class Scenario:
    name: str
    model: str
    n: int
    null: NullHypothesis
    true_beta: np.ndarray
    regime: str
    kind: str
    reps: int
    alphas: tuple = DEFAULT_ALPHAS
    seed: int = 0
    k: Union[int, np.ndarray, None] = None

    def __post_init__(self) -> None:
        if self.model not in ("beta", "bt"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.regime not in lrt.REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        if self.kind not in ("type1", "power"):
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.reps < 1:
            raise ValueError("reps must be positive")
        b = np.asarray(self.true_beta, dtype=float)
        if b.shape != (self.n,):
            raise ValueError("true_beta length must equal n")
        if self.model == "bt" and b[0] != 0.0:
            raise ValueError("comparison-model scenarios need true_beta[0] = 0")
        if self.model == "bt" and self.k is None:
            raise ValueError("comparison-model scenarios need pair totals k")
        b.setflags(write=False)
        object.__setattr__(self, "true_beta", b)
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        for a in self.alphas:
            if not 0.0 < a < 1.0:
                raise ValueError("alpha levels must be inside (0, 1)")
        self.null.validate_for(self.model, self.n)

    def null_holds(self) -> bool:
        """Whether true_beta satisfies the null exactly."""
        b = self.true_beta
        r = self.null.r
        if self.null.kind == "specified":
            if self.model == "beta":
                return bool(np.array_equal(b[:r], self.null.values))
            return bool(np.array_equal(b[1:r], self.null.values))
        block = b[:r] if self.model == "beta" else b[1:r]
        return bool(block.size == 0 or np.all(block == block[0]))

    def to_dict(self) -> dict:
        k: Union[int, list, None]
        if isinstance(self.k, np.ndarray):
            k = self.k.tolist()
        else:
            k = self.k
        return {
            "name": self.name,
            "model": self.model,
            "n": self.n,
            "null": self.null.to_dict(),
            "true_beta": [float(v) for v in self.true_beta],
            "regime": self.regime,
            "kind": self.kind,
            "reps": self.reps,
            "alphas": list(self.alphas),
            "seed": self.seed,
            "k": k,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        k = d.get("k")
        if isinstance(k, list):
            k = np.asarray(k, dtype=np.int64)
        return cls(
            name=d.get("name", "custom"),
            model=d["model"],
            n=int(d["n"]),
            null=NullHypothesis.from_dict(d["null"]),
            true_beta=np.asarray(d["true_beta"], dtype=float),
            regime=d["regime"],
            kind=d.get("kind", "type1"),
            reps=int(d["reps"]),
            alphas=tuple(d.get("alphas", DEFAULT_ALPHAS)),
            seed=int(d.get("seed", 0)),
            k=k,
        )


def linear_profile(n: int, L: float) -> np.ndarray:
    """Evenly spaced parameters from 0 to L across n nodes."""
    if n < 2:
        raise ValueError("need n >= 2")
    return np.arange(n) * (L / (n - 1))


def _tail_profile(n: int, r: int, L: float) -> np.ndarray:
    """Trailing profile for fixed-block designs: position i keeps the linear value."""
    return np.arange(r, n) * (L / (n - 1))


def _power_profile(n: int, r: int, c: float) -> np.ndarray:
    head = np.arange(1, r + 1) * (c / r)
    tail = 0.2 * np.arange(1, n - r + 1) * math.log(n) / n
    return np.concatenate([head, tail])


def build_scenario(preset: str, **params) -> Scenario:
    """Resolve a named design into a concrete Scenario.

    Common parameters: n, reps, seed, alphas, model (graph designs accept
    model="bt" with k).  Design-specific: L (profile height) for H01/H02/H04,
    explicit `values` plus L for H03, and (r, c) for the power presets.
    """
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}; choose from {PRESETS}")
    model = params.pop("model", "beta" if preset in ("H01", "H02", "H03", "H04", "PowerBeta") else "bt")
    n = int(params.pop("n", 30 if preset == "NBASmall" else 100))
    reps = int(params.pop("reps", 2000))
    seed = int(params.pop("seed", 0))
    alphas = tuple(params.pop("alphas", DEFAULT_ALPHAS))
    k = params.pop("k", None)
    if model == "bt" and k is None:
        k = 3 if preset == "NBASmall" else 1

    if preset in ("H01", "H02"):
        L = float(params.pop("L", 0.0))
        true = linear_profile(n, L)
        if preset == "H01":
            if model == "beta":
                null = NullHypothesis.specified(n, true)
            else:
                null = NullHypothesis.specified(n, true[1:])
            regime = "growing"
        else:
            r = int(params.pop("r", n // 2))
            true = true.copy()
            true[:r] = 0.0
            null = NullHypothesis.homogeneous(r)
            regime = "growing"
        scenario = Scenario(
            name=preset, model=model, n=n, null=null, true_beta=true,
            regime=regime, kind="type1", reps=reps, alphas=alphas, seed=seed, k=k,
        )
    elif preset == "H03":
        values = np.asarray(params.pop("values"), dtype=float)
        L = float(params.pop("L", 0.0))
        if model == "beta":
            r = values.size
            head = values
            null = NullHypothesis.specified(r, values)
        else:
            r = values.size + 1
            head = np.concatenate([[0.0], values])
            null = NullHypothesis.specified(r, values)
        true = np.concatenate([head, _tail_profile(n, r, L)])
        scenario = Scenario(
            name=preset, model=model, n=n, null=null, true_beta=true,
            regime="fixed", kind="type1", reps=reps, alphas=alphas, seed=seed, k=k,
        )
    elif preset == "H04":
        r = int(params.pop("r", 5))
        L = float(params.pop("L", 0.0))
        true = np.concatenate([np.zeros(r), _tail_profile(n, r, L)])
        scenario = Scenario(
            name=preset, model=model, n=n, null=NullHypothesis.homogeneous(r), true_beta=true,
            regime="fixed", kind="type1", reps=reps, alphas=alphas, seed=seed, k=k,
        )
    else:
        r = int(params.pop("r", 10 if preset == "NBASmall" else 5))
        c = float(params.pop("c", 0.0))
        true = _power_profile(n, r, c)
        if preset == "PowerBeta":
            scenario = Scenario(
                name=preset, model="beta", n=n, null=NullHypothesis.homogeneous(r), true_beta=true,
                regime="fixed", kind="power", reps=reps, alphas=alphas, seed=seed,
            )
        else:
            true = true - true[0]
            scenario = Scenario(
                name=preset, model="bt", n=n, null=NullHypothesis.homogeneous(r), true_beta=true,
                regime="fixed", kind="power", reps=reps, alphas=alphas, seed=seed, k=k,
            )
    if params:
        raise ValueError(f"unused scenario parameters: {sorted(params)}")
    return scenario


@dataclass
class MCReport:
    rejection_rate: Optional[dict]
    nonexist_freq: float
    reps_used: int
    stats: np.ndarray
    pvalues: Optional[np.ndarray] = None
    qq: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        out = {
            "rejection_rate": (
                {f"{a:g}": rate for a, rate in self.rejection_rate.items()}
                if self.rejection_rate is not None
                else None
            ),
            "nonexist_freq": self.nonexist_freq,
            "reps_used": self.reps_used,
        }
        return out

    def existing_stats(self) -> np.ndarray:
        return self.stats[np.isfinite(self.stats)]


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for one replicate: SeedSequence on (seed, index)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=(seed, index)))


def _simulate(scenario: Scenario, rng: np.random.Generator):
    if scenario.model == "beta":
        return beta_model.simulate_graph(scenario.true_beta, rng)
    return bt_model.simulate_comparisons(scenario.true_beta, scenario.k, rng)


def _one_replicate(scenario: Scenario, index: int, stats_only: bool):
    rng = replicate_rng(scenario.seed, index)
    data = _simulate(scenario, rng)
    null = scenario.null
    try:
        if scenario.model == "beta":
            full = beta_model.fit_mle(data)
            if null.kind == "specified":
                restr = beta_model.fit_restricted_specified(data, null)
            else:
                restr = beta_model.fit_restricted_homogeneous(data, null.r)
        else:
            full = bt_model.bt_fit_mle(data)
            restr = bt_model.bt_fit_restricted(data, null)
        stat = lrt.lrt_statistic(full, restr)
    except NonexistentMLEError:
        return index, float("nan"), float("nan")
    if stats_only:
        return index, stat, float("nan")
    reference = lrt.reference_distribution(scenario.model, null, scenario.regime)
    if scenario.regime == "growing":
        p = lrt.chi_square_sf(stat, null.r)
    elif isinstance(reference, lrt.ChiSquare):
        p = lrt.chi_square_sf(stat, reference.df)
    else:
        boot_stats, total = lrt.bootstrap_distribution(
            data, null, restr.beta_hat, reference.B, rng
        )
        if len(boot_stats) < total / 2:
            return index, stat, float("nan")
        exceed = sum(1 for s in boot_stats if s >= stat)
        p = (1.0 + exceed) / (len(boot_stats) + 1.0)
    return index, stat, p


def _replicate_batch(args):
    scenario, indices, stats_only = args
    return [_one_replicate(scenario, i, stats_only) for i in indices]


def run_scenario(scenario: Scenario, *, workers: int = 1, stats_only: bool = False) -> MCReport:
    """Run every replicate and aggregate; deterministic for fixed (scenario, seed)."""
    reps = scenario.reps
    stats = np.full(reps, np.nan)
    pvals = np.full(reps, np.nan)
    if workers <= 1:
        for i in range(reps):
            _, stats[i], pvals[i] = _one_replicate(scenario, i, stats_only)
            if i == 99 and reps > 200 and not np.any(np.isfinite(stats[:100])):
                raise RuntimeError("first 100 replicates all lack a maximizer; aborting")
    else:
        chunks = np.array_split(np.arange(reps), max(workers * 4, 1))
        jobs = [(scenario, chunk.tolist(), stats_only) for chunk in chunks if chunk.size]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for batch in pool.map(_replicate_batch, jobs):
                for i, s, p in batch:
                    stats[i], pvals[i] = s, p
    exists = np.isfinite(stats)
    used = int(exists.sum())
    nonexist = reps - used
    if nonexist > reps / 2:
        raise RuntimeError(
            f"maximizer missing in {nonexist} of {reps} replicates; the design is too extreme"
        )
    rates = None
    if not stats_only:
        rates = {a: float((pvals[exists] <= a).mean()) for a in scenario.alphas}
    return MCReport(
        rejection_rate=rates,
        nonexist_freq=nonexist / reps,
        reps_used=used,
        stats=stats,
        pvalues=None if stats_only else pvals,
    )


def run_type1(scenario: Scenario, *, workers: int = 1) -> MCReport:
    """Rejection rates under a null-true scenario."""
    if not scenario.null_holds():
        raise ValueError("scenario's generating parameters do not satisfy its null")
    return run_scenario(scenario, workers=workers)


def run_power(scenario: Scenario, *, workers: int = 1) -> MCReport:
    """Rejection rates under the scenario as given (power when the null fails)."""
    return run_scenario(scenario, workers=workers)


def quantile_pairs(stats: np.ndarray, reference, r: Optional[int] = None) -> np.ndarray:
    """Pair sorted statistics with reference quantiles at positions (i-1/2)/m."""
    stats = np.asarray(stats, dtype=float)
    stats = stats[np.isfinite(stats)]
    m = stats.size
    if m == 0:
        raise ValueError("no statistics to pair")
    emp = np.sort(stats)
    pp = (np.arange(1, m + 1) - 0.5) / m
    if isinstance(reference, lrt.ChiSquare):
        theo = np.array([lrt.chi_square_quantile(q, reference.df) for q in pp])
    elif isinstance(reference, lrt.NormalizedGaussian):
        if r is None:
            raise ValueError("normalized reference needs the null dimension r")
        emp = (emp - r) / math.sqrt(2.0 * r)
        theo = np.array([lrt.normal_quantile(q) for q in pp])
    else:
        raise ValueError("quantile pairing needs a chi-square or normalized reference")
    return np.column_stack([theo, emp])


def qq_data(scenario: Scenario, reference=None, *, workers: int = 1) -> np.ndarray:
    """Replicate the scenario and return (theoretical, empirical) quantile pairs.

    Defaults to the chi-square surrogate with df = r in the growing regime
    and the dispatched chi-square law in the fixed regime.
    """
    if reference is None:
        dispatched = lrt.reference_distribution(scenario.model, scenario.null, scenario.regime)
        reference = lrt.ChiSquare(scenario.null.r) if scenario.regime == "growing" else dispatched
        if isinstance(reference, lrt.Bootstrap):
            raise ValueError("no default quantile reference for the bootstrap case; pass one")
    report = run_scenario(scenario, workers=workers, stats_only=True)
    return quantile_pairs(report.stats, reference, r=scenario.null.r)
