import json
import math
import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from vrlai import (
    erlang,
    exponential,
    from_spec,
    iid_convolution,
    load_spec,
    lomax,
    mixture,
    numeric_only,
    order_statistic,
    parallel,
    pareto,
    series,
)
from vrlai.errors import BadOrder, BadWeights, ModelSpecError, NoDensity, UndefinedAtBreakpoint, UnknownFixture
from vrlai.fixtures import FIXTURE_IDS, is_pair, build_fixture

from .frozen import EX3_2_SF1, PARALLEL_EXP2_SF05

GRID = np.linspace(0.0, 20.0, 10_001)


def single_fixtures():
    return [f for f in FIXTURE_IDS if not is_pair(f)]


def all_models():
    out = [(f, build_fixture(f)) for f in single_fixtures()]
    for f in FIXTURE_IDS:
        if is_pair(f):
            for mode in ("model", "formula"):
                X, Y = build_fixture(f, mode)
                out += [(f"{f}/{mode}/X", X), (f"{f}/{mode}/Y", Y)]
    return out


class TestPrimitives:
    def test_exponential(self):
        m = exponential(1.0)
        assert m.survival(0.0) == 1.0
        assert_allclose(exponential(3.0).hazard(np.array([0.1, 2.0, 9.0])), 3.0, rtol=1e-12)

    def test_erlang(self):
        m = erlang(2, 5.0)
        assert m.density(1.0) == pytest.approx(25 * math.exp(-5), rel=1e-13)
        assert m.density(1.0) == pytest.approx(0.1684487, abs=1e-7)
        assert_allclose(m.survival(GRID), (1 + 5 * GRID) * np.exp(-5 * GRID), rtol=1e-12, atol=1e-300)

    def test_pareto_model_and_formula(self):
        m = pareto(2.0, 1.0)
        assert m.survival(0.5) == 1.0 and m.survival(2.0) == pytest.approx(1 / 8)
        assert m.support_start == 1.0 and m.breakpoints == (1.0,)
        f = pareto(2.0, 1.0, formula=True)
        assert f.support_start == 0.0 and f.survival(0.5) == pytest.approx(8.0)

    @pytest.mark.parametrize("a", [1.0, 0.5, -2.0])
    def test_pareto_needs_finite_variance(self, a):
        with pytest.raises(ValueError):
            pareto(a, 1.0)

    def test_lomax_is_cube_law(self):
        assert lomax(2.0, 1.0).survival(1.0) == pytest.approx(1 / 8, rel=1e-15)

    @pytest.mark.parametrize("bad", [lambda: exponential(0.0), lambda: erlang(0, 1.0), lambda: lomax(2.0, -1.0)])
    def test_bad_parameters(self, bad):
        with pytest.raises(ValueError):
            bad()


class TestTransforms:
    def test_identical_mixture_simplifies(self):
        m = mixture([exponential(1.0), exponential(1.0)], [0.3, 0.7])
        assert m == exponential(1.0)
        assert_allclose(m.survival(GRID), np.exp(-GRID), rtol=0, atol=1e-15)

    def test_mixture_convex_combination(self):
        parts = [exponential(1.0), erlang(2, 1.0), lomax(3.0, 2.0)]
        w = [0.2, 0.5, 0.3]
        m = mixture(parts, w)
        expected = sum(wi * p.survival(GRID) for wi, p in zip(w, parts))
        assert np.max(np.abs(m.survival(GRID) - expected)) <= 1e-15

    @pytest.mark.parametrize("w", [[0.5, 0.6], [-0.1, 1.1], [1.0]])
    def test_bad_weights(self, w):
        with pytest.raises(BadWeights):
            mixture([exponential(1.0), exponential(2.0)], w)

    def test_convolution_of_exponentials_is_erlang(self):
        m = iid_convolution(exponential(1.0), 2)
        assert m == erlang(2, 1.0)
        assert m.survival(1.0) == pytest.approx(2 * math.exp(-1), rel=1e-14)
        assert m.hazard(1.0) == pytest.approx(0.5, rel=1e-12)

    def test_numeric_convolution(self):
        m = iid_convolution(numeric_only(exponential(1.0)), 2)
        t = np.array([0.0, 0.3, 1.0, 2.5, 6.0])
        assert_allclose(m.survival(t), (1 + t) * np.exp(-t), rtol=1e-8, atol=1e-12)
        assert_allclose(m.density(t[1:]), t[1:] * np.exp(-t[1:]), rtol=1e-6)

    def test_numeric_convolution_is_thread_safe(self):
        m = iid_convolution(numeric_only(exponential(2.0)), 2)
        t = np.linspace(0.1, 3.0, 7)
        out = [None] * 4

        def work(i):
            out[i] = m.survival(t)

        threads = [threading.Thread(target=work, args=(i,)) for i in range(4)]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
        for o in out:
            assert_allclose(o, (1 + 2 * t) * np.exp(-2 * t), rtol=1e-8)

    def test_order_statistic_closed_form(self):
        m = order_statistic(exponential(1.0), 2, 3)
        assert m.survival(1.0) == pytest.approx(math.exp(-3) * (3 * math.e - 2), rel=1e-14)
        assert m.survival(1.0) == pytest.approx(EX3_2_SF1, rel=1e-14)
        assert m.density(1.0) == pytest.approx(6 * math.exp(-3) * (math.e - 1), rel=1e-12)

    def test_parallel_closed_form(self):
        m = parallel(exponential(2.0), 2)
        assert m.survival(0.5) == pytest.approx(2 * math.exp(-1) - math.exp(-2), rel=1e-14)
        assert m.survival(0.5) == pytest.approx(PARALLEL_EXP2_SF05, rel=1e-14)

    @pytest.mark.parametrize("child", [exponential(1.5), erlang(3, 2.0), lomax(2.5, 1.0), pareto(2.0, 1.0)])
    @pytest.mark.parametrize("n", [1, 2, 4])
    def test_order_statistic_extremes(self, child, n):
        t = np.linspace(0.0, 10.0, 301)
        assert_allclose(order_statistic(child, 1, n).survival(t), series(child, n).survival(t), atol=1e-12)
        assert_allclose(order_statistic(child, n, n).survival(t), parallel(child, n).survival(t), atol=1e-12)

    @pytest.mark.parametrize("build", [parallel, series, lambda m, n: order_statistic(m, 2, n)])
    def test_system_bounds(self, build):
        child = erlang(2, 1.0)
        m = build(child, 3)
        assert m.survival(0.0) == 1.0
        t = np.linspace(5.0, 30.0, 50)
        assert np.all(m.survival(t) <= 3 * child.survival(t) + 1e-300)

    def test_bad_order(self):
        with pytest.raises(BadOrder):
            order_statistic(exponential(1.0), 4, 3)
        with pytest.raises(BadOrder):
            order_statistic(exponential(1.0), 0, 3)


class TestFixtures:
    def test_jump_fixture(self):
        m = build_fixture("ex2_3")
        assert m.survival(0.5) == pytest.approx(0.5, rel=1e-15)
        assert m.left_survival(0.5) == 1.0
        assert m.atoms() == [(0.5, pytest.approx(0.5))]
        assert not m.has_density
        with pytest.raises(NoDensity):
            m.density(0.2)
        with pytest.raises(NoDensity):
            m.hazard(1.0)

    def test_breakpoints(self):
        assert build_fixture("ex2_1").breakpoints == (1.0,)
        assert build_fixture("ex2_2").breakpoints == (1.0,)
        assert build_fixture("ex2_3").breakpoints == (0.5,)
        assert build_fixture("ex2_4").breakpoints == pytest.approx((1 / 3, 2 / 3))

    def test_density_undefined_at_kink(self):
        with pytest.raises(UndefinedAtBreakpoint):
            build_fixture("ex2_4").density(1 / 3)

    def test_named_values(self):
        assert build_fixture("eg2_1_cube").survival(1.0) == pytest.approx(1 / 8)
        assert build_fixture("ex2_4").survival(0.5) == pytest.approx(math.exp(-2 / 3), rel=1e-15)
        assert build_fixture("ex2_4").survival(0.5) == pytest.approx(0.5134171, abs=1e-7)
        assert build_fixture("ex3_1_conv").survival(1.0) == pytest.approx(0.7357589, abs=1e-7)

    def test_repaired_survival_is_continuous(self):
        m = build_fixture("ex2_2")
        assert m.survival(1.0) == pytest.approx(math.exp(-1), rel=1e-14)
        assert m.left_survival(1.0) == pytest.approx(m.survival(1.0), rel=1e-14)
        assert m.has_density

    @pytest.mark.parametrize("name, model", all_models(), ids=lambda v: v if isinstance(v, str) else "")
    def test_survival_is_a_survival_function(self, name, model):
        s = np.asarray(model.survival(GRID))
        live = GRID >= model.support_start
        assert np.all(np.diff(s[live]) <= 1e-15)
        if "formula" not in name:
            assert np.all((s >= 0) & (s <= 1))
            assert np.all(s[GRID < model.support_start] == 1.0)
        assert model.survival(1e6) < 1e-12

    def test_pairs_and_modes(self):
        X, Y = build_fixture("ex4_6_pair")
        assert build_fixture("ex4_6") == (X, Y)
        assert build_fixture("ex4_2", "formula")[1].survival(0.5) == pytest.approx(8.0)
        with pytest.raises(ValueError):
            build_fixture("ex4_2", "symbolic")

    @pytest.mark.parametrize("fid", ["nope", "exp()", "erlang(2)", "pareto(0.5)", "exp(x)"])
    def test_unknown_fixture(self, fid):
        with pytest.raises(UnknownFixture):
            build_fixture(fid)

    def test_parametric_ids(self):
        assert build_fixture("exp(2)") == exponential(2.0)
        assert build_fixture("erlang(2,5)") == erlang(2, 5.0)
        assert build_fixture("pareto(3,2)").survival(4.0) == pytest.approx(1 / 16)


class TestSpecDocuments:
    def test_examples(self):
        assert load_spec('{"kind":"exponential","rate":1.0}') == exponential(1.0)
        assert load_spec('{"kind":"pareto","a":2,"b":1}') == pareto(2.0, 1.0)
        doc = {"kind": "order_statistic", "k": 2, "n": 3, "child": {"kind": "exponential", "rate": 1.0}}
        assert from_spec(doc).survival(1.0) == pytest.approx(EX3_2_SF1, rel=1e-14)
        assert load_spec('{"kind":"fixture","id":"ex3_1_conv"}') == erlang(2, 1.0)

    def test_nested_mixture(self):
        doc = {
            "kind": "mixture",
            "weights": [0.25, 0.75],
            "components": [{"kind": "lomax", "a": 2}, {"kind": "series", "n": 2, "child": {"kind": "erlang", "k": 2, "rate": 1}}],
        }
        m = load_spec(json.dumps(doc))
        t = np.linspace(0, 5, 11)
        assert_allclose(m.survival(t), 0.25 * (1 + t) ** -3 + 0.75 * ((1 + t) * np.exp(-t)) ** 2, rtol=1e-14)

    @pytest.mark.parametrize(
        "text",
        [
            "not json",
            "[1, 2]",
            '{"rate": 1}',
            '{"kind":"weibull","shape":2}',
            '{"kind":"exponential","rate":1,"scale":2}',
            '{"kind":"erlang","k":2}',
            '{"kind":"exponential","rate":-1}',
            '{"kind":"fixture","id":"ex4_4_pair"}',
            '{"kind":"fixture","id":"nope"}',
            '{"kind":"mixture","components":[{"kind":"exponential","rate":1}],"weights":[0.5]}',
        ],
    )
    def test_rejected(self, text):
        with pytest.raises(ModelSpecError):
            load_spec(text)


@settings(max_examples=40, deadline=None)
@given(
    rate=st.floats(0.2, 5.0),
    n=st.integers(1, 5),
    t=st.lists(st.floats(0.0, 20.0), min_size=1, max_size=8),
)
def test_system_survivals_stay_probabilities(rate, n, t):
    t = np.sort(np.array(t))
    for build in (parallel, series):
        s = build(exponential(rate), n).survival(t)
        assert np.all((s >= 0) & (s <= 1))
        assert np.all(np.diff(s) <= 1e-15)
