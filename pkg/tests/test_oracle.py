import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vrlai import exponential, lomax, oracle, residual
from vrlai.errors import DivergentIntegral, TooFewSurvivors
from vrlai.fixtures import build_fixture
from vrlai.oracle import cross_validate, dense_reference, empirical_residual_moments, finite_fourth_moment, sample

CONV = build_fixture("ex3_1_conv")
OSTAT = build_fixture("ex3_2_ostat")
CUBE = build_fixture("eg2_1_cube")


class TestSample:
    def test_deterministic(self):
        a = sample(CONV, 1000, seed=7)
        assert np.array_equal(a, sample(CONV, 1000, seed=7))
        assert not np.array_equal(a, sample(CONV, 1000, seed=8))
        assert not np.array_equal(a, sample(CONV, 1000, seed=7, stream=1))

    def test_prefix_stable_across_sizes(self):
        a = sample(exponential(1.0), 10, seed=3)
        b = sample(exponential(1.0), oracle.CHUNK + 5, seed=3)
        assert np.array_equal(a, b[:10])

    def test_inverts_survival(self):
        x = sample(exponential(2.0), 2000, seed=1)
        assert np.all(x >= 0)
        u = 1.0 - np.random.Generator(np.random.PCG64(np.random.SeedSequence(1, spawn_key=(0, 0)))).random(2000)
        np.testing.assert_allclose(np.exp(-2 * x), u, rtol=1e-9)

    def test_support_start(self):
        assert np.min(sample(build_fixture("ex4_2_pair")[1], 5000, seed=2)) >= 1.0

    def test_atom(self):
        x = sample(build_fixture("ex2_3"), 100_000, seed=11)
        frac = np.mean(x == 0.5)
        assert abs(frac - 0.5) <= 4 * 0.5 / np.sqrt(x.size)
        assert np.all(x >= 0.5)

    def test_bad_size(self):
        with pytest.raises(ValueError):
            sample(CONV, 0)


class TestEmpirical:
    def test_memoryless(self):
        x = sample(exponential(1.0), 200_000, seed=5)
        e = empirical_residual_moments(x, 2.0)
        assert abs(e.mu - 1.0) <= 4 * e.se_mu
        assert abs(e.var - 1.0) <= 4 * e.se_var
        assert e.n_eff == int(np.sum(x > 2.0))

    def test_too_few(self):
        with pytest.raises(TooFewSurvivors):
            empirical_residual_moments(np.arange(10.0), 5.0)

    def test_fourth_moment_heuristic(self):
        assert finite_fourth_moment(CONV)
        assert not finite_fourth_moment(CUBE)
        assert finite_fourth_moment(lomax(5.0, 1.0))


class TestDenseReference:
    def test_exponential(self):
        ref = dense_reference(exponential(1.0), [5.0])
        assert abs(ref.vrlai[0] - 1) <= 1e-4

    def test_printed_intensities(self):
        assert abs(dense_reference(CONV, [6.0]).vrlai[0] - 0.8402997) <= 5e-4
        assert abs(dense_reference(OSTAT, [1.5]).vrlai[0] - 0.88633) <= 5e-4

    def test_jump_uses_right_limit(self):
        ref = dense_reference(build_fixture("ex2_3"), [0.25, 0.5, 1.0])
        np.testing.assert_allclose(ref.vrl, residual.vrl(build_fixture("ex2_3"), [0.25, 0.5, 1.0]), rtol=1e-4)

    def test_divergent(self):
        with pytest.raises(DivergentIntegral):
            dense_reference(build_fixture("ex2_1"), [0.5, 2.0])

    def test_step_limit(self):
        with pytest.raises(ValueError):
            dense_reference(CONV, [1.0], fine_step=1e-2)

    @settings(max_examples=20, deadline=None)
    @given(st.lists(st.floats(0.0, 12.0), min_size=1, max_size=20))
    def test_random_times(self, ts):
        for m in (CONV, OSTAT):
            ref = dense_reference(m, ts)
            an = residual.vrl(m, ts)
            assert np.all(np.abs(ref.vrl - an) <= 1e-4 * np.maximum(1.0, an))


class TestCrossValidate:
    def test_exponential(self):
        assert cross_validate(exponential(1.0), np.linspace(0.05, 10, 50), tol=1e-5).passed

    def test_cube(self):
        assert cross_validate(CUBE, np.linspace(0.05, 10, 50), tol=1e-4).passed

    def test_divergent_rows_flagged(self):
        rep = cross_validate(build_fixture("ex2_1"), [0.5, 1.5, 3.0])
        flagged = [r for r in rep.records if r.note == "DivergentIntegral"]
        assert {r.quantity for r in flagged} == {"vrl", "cum_vrl", "vrlai"}
        assert not rep.passed

    def test_report_serialises(self):
        rep = cross_validate(CONV, [0.5, 1.0], mc=20_000, seed=4)
        d = json.loads(rep.to_json())
        assert d["seed"] == 4 and d["sample_size"] == 20_000
        assert {r["quantity"] for r in d["records"]} >= {"mrl", "vrl", "mrl_mc", "vrl_mc"}
        assert "mrl" in rep.to_table()

    def test_deterministic(self):
        args = dict(grid=[0.5, 2.0], mc=30_000, seed=99)
        assert cross_validate(OSTAT, **args).to_json() == cross_validate(OSTAT, **args).to_json()

    def test_underflowing_survival_is_skipped(self):
        rep = cross_validate(build_fixture("ex2_2"), [1.0, 3.0, 9.0])
        assert rep.passed and {r.t for r in rep.records} == {1.0, 3.0}
        assert any("underflow" in s for s in rep.skipped)

    def test_heavy_tail_skips_variance_mc(self):
        rep = cross_validate(CUBE, [0.5, 1.0], mc=20_000, seed=1)
        assert not any(r.quantity == "vrl_mc" for r in rep.records)
        assert any("fourth" in s for s in rep.skipped)


@pytest.mark.mc
class TestMillionDraws:
    def test_exponential_mean(self):
        x = sample(exponential(1.0), 10**6, seed=0)
        assert abs(x.mean() - 1.0) <= 0.004

    def test_convolution(self):
        x = sample(CONV, 10**6, seed=0)
        assert abs(x.mean() - 2.0) <= 0.006
        e = empirical_residual_moments(x, 4.0)
        assert abs(e.var - 1.36) <= 4 * e.se_var

    def test_order_statistic_variance(self):
        x = sample(OSTAT, 10**6, seed=0)
        e = empirical_residual_moments(x, 0.0)
        assert abs(e.var - 13 / 36) <= 4 * e.se_var

    def test_atom_fraction(self):
        x = sample(build_fixture("ex2_3"), 10**6, seed=0)
        assert abs(np.mean(x == 0.5) - 0.5) <= 0.002
