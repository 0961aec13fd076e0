import json

import numpy as np
import pytest

from pairlrt import lrt
from pairlrt import montecarlo as mc
from pairlrt.core import NullHypothesis


def test_replicate_rng_frozen_stream():
    draw = mc.replicate_rng(42, 7).integers(0, 1000, 3)
    assert draw.tolist() == [480, 519, 332]
    again = mc.replicate_rng(42, 7).integers(0, 1000, 3)
    assert np.array_equal(draw, again)
    other = mc.replicate_rng(42, 8).integers(0, 1000, 3)
    assert not np.array_equal(draw, other)


def test_preset_h01():
    s = mc.build_scenario("H01", reps=10)
    assert (s.model, s.n, s.regime, s.kind) == ("beta", 100, "growing", "type1")
    assert s.null.kind == "specified" and s.null.r == 100
    assert s.null_holds()
    s2 = mc.build_scenario("H01", n=20, L=0.8, reps=10)
    assert s2.true_beta[-1] == pytest.approx(0.8)
    assert s2.true_beta[0] == 0.0
    assert s2.null_holds()


def test_preset_h02():
    s = mc.build_scenario("H02", n=40, L=0.6, reps=10)
    assert s.null.kind == "homogeneous" and s.null.r == 20
    assert s.regime == "growing"
    assert np.all(s.true_beta[:20] == 0.0)
    assert s.true_beta[20] > 0.0
    assert s.null_holds()


def test_preset_h03():
    s = mc.build_scenario("H03", n=30, values=[0.1, -0.2], L=0.5, reps=10)
    assert s.null.kind == "specified" and s.null.r == 2
    assert s.regime == "fixed"
    assert np.array_equal(s.true_beta[:2], [0.1, -0.2])
    # tail keeps the linear profile's own positions
    assert s.true_beta[2] == pytest.approx(2 * 0.5 / 29)
    assert s.null_holds()
    sbt = mc.build_scenario("H03", model="bt", n=10, values=[0.3, 0.3], k=2, reps=10)
    assert sbt.null.r == 3 and sbt.true_beta[0] == 0.0
    assert sbt.null_holds()


def test_preset_h04_and_power():
    s = mc.build_scenario("H04", n=50, L=0.4, reps=10)
    assert s.null == NullHypothesis.homogeneous(5)
    assert s.regime == "fixed" and s.kind == "type1"
    assert s.null_holds()
    p = mc.build_scenario("PowerBeta", n=50, r=5, c=0.8, reps=10)
    assert p.kind == "power" and p.model == "beta"
    assert not p.null_holds()
    p0 = mc.build_scenario("PowerBeta", n=50, r=5, c=0.0, reps=10)
    assert p0.null_holds()
    pbt = mc.build_scenario("PowerBT", n=20, r=5, c=1.0, reps=10)
    assert pbt.model == "bt" and pbt.k == 1 and pbt.true_beta[0] == 0.0
    nba = mc.build_scenario("NBASmall", reps=10)
    assert (nba.n, nba.k, nba.null.r, nba.kind) == (30, 3, 10, "power")


def test_build_scenario_rejects_leftovers():
    with pytest.raises(ValueError, match="unknown preset"):
        mc.build_scenario("H99")
    with pytest.raises(ValueError, match="unused"):
        mc.build_scenario("H01", c=0.5)
    with pytest.raises(ValueError, match="unused"):
        mc.build_scenario("H04", values=[0.0])


def test_scenario_validation():
    null = NullHypothesis.homogeneous(2)
    ok = dict(name="x", model="beta", n=4, null=null, true_beta=np.zeros(4),
              regime="fixed", kind="type1", reps=5)
    mc.Scenario(**ok)
    with pytest.raises(ValueError):
        mc.Scenario(**{**ok, "model": "ising"})
    with pytest.raises(ValueError):
        mc.Scenario(**{**ok, "regime": "shrinking"})
    with pytest.raises(ValueError):
        mc.Scenario(**{**ok, "kind": "type2"})
    with pytest.raises(ValueError):
        mc.Scenario(**{**ok, "reps": 0})
    with pytest.raises(ValueError):
        mc.Scenario(**{**ok, "true_beta": np.zeros(5)})
    with pytest.raises(ValueError):
        mc.Scenario(**{**ok, "alphas": (0.05, 1.5)})
    with pytest.raises(ValueError, match="pair totals"):
        mc.Scenario(**{**ok, "model": "bt"})
    with pytest.raises(ValueError, match="true_beta\\[0\\]"):
        mc.Scenario(**{**ok, "model": "bt", "k": 2, "true_beta": np.ones(4)})


def test_scenario_roundtrip_json():
    s = mc.build_scenario("NBASmall", c=0.7, reps=10, seed=9, alphas=(0.01, 0.05))
    d = json.loads(json.dumps(s.to_dict()))
    s2 = mc.Scenario.from_dict(d)
    assert s2.to_dict() == s.to_dict()


def test_run_type1_guards_null():
    s = mc.build_scenario("PowerBeta", n=20, r=4, c=0.8, reps=5)
    with pytest.raises(ValueError, match="null"):
        mc.run_type1(s)


def test_run_scenario_small():
    s = mc.build_scenario("H04", n=16, r=3, reps=24, seed=11)
    rep = mc.run_type1(s)
    assert set(rep.rejection_rate) == {0.05, 0.10}
    for rate in rep.rejection_rate.values():
        assert 0.0 <= rate <= 1.0
    assert rep.reps_used + round(rep.nonexist_freq * 24) == 24
    finite = np.isfinite(rep.stats)
    assert finite.sum() == rep.reps_used
    assert np.all(rep.stats[finite] >= 0.0)
    pv = rep.pvalues[np.isfinite(rep.pvalues)]
    assert np.all((pv >= 0.0) & (pv <= 1.0))
    assert np.array_equal(rep.existing_stats(), rep.stats[finite])
    d = rep.to_dict()
    assert d["reps_used"] == rep.reps_used and "0.05" in d["rejection_rate"]


def test_stats_only_skips_pvalues():
    s = mc.build_scenario("H04", n=16, r=3, reps=8, seed=11)
    rep = mc.run_scenario(s, stats_only=True)
    assert rep.rejection_rate is None and rep.pvalues is None
    assert rep.reps_used > 0


def test_worker_determinism():
    s = mc.build_scenario("H04", n=16, r=3, reps=24, seed=11)
    one = mc.run_type1(s, workers=1)
    three = mc.run_type1(s, workers=3)
    assert np.array_equal(one.stats, three.stats, equal_nan=True)
    assert np.array_equal(one.pvalues, three.pvalues, equal_nan=True)
    assert one.rejection_rate == three.rejection_rate


def test_extending_reps_preserves_prefix():
    short = mc.build_scenario("H04", n=16, r=3, reps=10, seed=11)
    long = mc.build_scenario("H04", n=16, r=3, reps=20, seed=11)
    a = mc.run_scenario(short, stats_only=True).stats
    b = mc.run_scenario(long, stats_only=True).stats
    assert np.array_equal(a, b[:10], equal_nan=True)


def test_nonexistence_tally_and_abort():
    s = mc.build_scenario("H01", n=12, L=0.9, reps=80, seed=3)
    rep = mc.run_scenario(s, stats_only=True)
    assert 0.0 < rep.nonexist_freq < 0.5
    assert rep.reps_used == round((1.0 - rep.nonexist_freq) * 80)
    extreme = mc.build_scenario("H01", n=12, L=3.0, reps=40, seed=3)
    with pytest.raises(RuntimeError, match="too extreme"):
        mc.run_scenario(extreme, stats_only=True)
    hopeless = mc.build_scenario("H01", n=12, L=3.0, reps=240, seed=3)
    with pytest.raises(RuntimeError, match="first 100"):
        mc.run_scenario(hopeless, stats_only=True)


def test_quantile_pairs_chi_square():
    stats = np.array([lrt.chi_square_quantile(q, 2) for q in (np.arange(1, 41) - 0.5) / 40])
    pairs = mc.quantile_pairs(stats, lrt.ChiSquare(2))
    assert pairs.shape == (40, 2)
    assert np.allclose(pairs[:, 0], pairs[:, 1], atol=1e-10)
    assert np.all(np.diff(pairs[:, 0]) > 0)


def test_quantile_pairs_normalized():
    stats = np.array([3.0, 5.0, np.nan, 7.0])
    pairs = mc.quantile_pairs(stats, lrt.NormalizedGaussian(), r=5)
    assert pairs.shape == (3, 2)
    assert pairs[1, 1] == pytest.approx(0.0)
    assert pairs[1, 0] == pytest.approx(lrt.normal_quantile(0.5))
    with pytest.raises(ValueError, match="needs the null dimension"):
        mc.quantile_pairs(stats, lrt.NormalizedGaussian())
    with pytest.raises(ValueError, match="no statistics"):
        mc.quantile_pairs(np.array([np.nan]), lrt.ChiSquare(1))
    with pytest.raises(ValueError, match="chi-square or normalized"):
        mc.quantile_pairs(stats, lrt.Bootstrap(99))


def test_qq_data_small_run():
    s = mc.build_scenario("H04", n=16, r=3, reps=12, seed=11)
    pairs = mc.qq_data(s)
    rep = mc.run_scenario(s, stats_only=True)
    assert pairs.shape == (rep.reps_used, 2)
    assert np.all(np.diff(pairs[:, 1]) >= 0)
    bt_fixed = mc.build_scenario("H03", model="bt", n=8, values=[0.0, 0.0], k=2, reps=5)
    with pytest.raises(ValueError, match="bootstrap"):
        mc.qq_data(bt_fixed)


def test_linear_profile():
    prof = mc.linear_profile(5, 2.0)
    assert np.allclose(prof, [0.0, 0.5, 1.0, 1.5, 2.0])
    with pytest.raises(ValueError):
        mc.linear_profile(1, 2.0)
