import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import R_THRESH, random_strongly_connected
from test_oracles import K1_ORACLE, K2_ORACLE, U0_ORACLE, X0_ORACLE
from leaderless.aggregate import (
    AggregateConstants,
    aggregate_constants,
    aggregate_vector_field,
    check_assumptions,
    equilibrium,
    individual_equilibrium,
    lyapunov,
    lyapunov_rate,
    shifted_vector_field,
)
from leaderless.errors import DegenerateRatio, DegenerateSum, IncompatibleEquilibrium, SingularBeyondKernel
from leaderless.model import NondimModel, make_model, nondim_vector_field, nondimensionalize, validate_weights
from leaderless.scenario import load_preset
from leaderless.synthesis import synthesize_orientations

STARS = ("star-random", "star-uniform", "star-skewed")
REF = AggregateConstants(K1_ORACLE, K2_ORACLE)


def model_with(rho, eco=None, weights=((0, 1), (1, 0))):
    n = len(rho)
    w = validate_weights(weights)
    eco = np.full(n, 0.5) if eco is None else np.asarray(eco, float)
    # nu = 0.5 everywhere so beta = 2 * eco
    return NondimModel(beta=2 * eco, nu=np.full(n, 0.5), rho=rho, weights=w)


def star_model(preset="star-random"):
    return load_preset(preset).nondim_model()


class TestAssumptions:
    def test_all_rho_one(self):
        assert check_assumptions(model_with([1.0, 1.0])).ok

    def test_reference_scenario(self):
        flags = check_assumptions(star_model())
        assert flags.ok
        assert flags.leaderless_residual < 1e-12

    @pytest.mark.parametrize("rho", [2.0, 0.0, 2.5, -0.1])
    def test_open_interval(self, rho):
        flags = check_assumptions(model_with([1.0, rho]))
        assert not flags.rho_in_range
        assert flags.rho_violations == (1,)

    def test_leaderless_flag(self):
        m = nondimensionalize(make_model([0.3] * 3, [0.1, 0.5, 0.9], [1, 1, 1], [[0, .5, .5], [.5, 0, .5], [.2, .8, 0]]))
        flags = check_assumptions(m)
        assert not flags.leaderless
        assert not flags.ok


class TestConstants:
    def test_trivial(self):
        c = aggregate_constants(model_with([1.0, 1.0]))
        assert (c.K1, c.K2) == (1.0, 0.0)

    def test_reference_values_against_oracle(self):
        c = aggregate_constants(star_model())
        assert c.K1 == pytest.approx(K1_ORACLE, abs=1e-12)
        assert c.K2 == pytest.approx(K2_ORACLE, abs=1e-12)

    @pytest.mark.parametrize("eps", [0.5, 0.1, 1e-3])
    def test_uniform_rho(self, eps):
        c = aggregate_constants(model_with([2 - eps] * 2, eco=[0.3, 0.9]))
        assert c.ratio == pytest.approx(1 - eps, rel=1e-12)

    @settings(max_examples=300, deadline=None)
    @given(st.integers(2, 12), st.integers(0, 2**31))
    def test_bound_under_rho_assumption(self, n, seed):
        rng = np.random.default_rng(seed)
        rho = rng.uniform(0, 2, n)
        rho = np.clip(rho, 1e-12, 2 - 1e-12)
        m = model_with(rho, eco=rng.uniform(0.01, 3, n), weights=random_strongly_connected(rng, n))
        c = aggregate_constants(m)
        assert abs(c.K2) <= c.K1 * np.max(np.abs(rho - 1)) * (1 + 1e-12)
        assert abs(c.K2) <= c.K1
        assert c.x0 > 0


class TestAggregateField:
    def test_equilibrium_is_fixed(self):
        np.testing.assert_allclose(aggregate_vector_field([REF.z0, REF.u0], REF), 0.0, atol=1e-15)

    def test_trivial(self):
        np.testing.assert_array_equal(aggregate_vector_field([0.0, 0.0], AggregateConstants(1.0, 0.0)), 0.0)

    def test_reference_at_origin(self):
        d = aggregate_vector_field([0.0, 0.0], REF)
        assert d[0] == 0.0
        assert d[1] == pytest.approx(0.45588, abs=1e-5)


class TestEquilibrium:
    def test_zero_k2(self):
        rep = equilibrium(model_with([1.0, 1.0]))
        assert (rep.z0, rep.u0, rep.x0) == (0.0, 0.0, 1.0)

    def test_reference_scenario(self):
        rep = equilibrium(star_model())
        assert rep.x0 == pytest.approx(X0_ORACLE, abs=1e-12)
        assert rep.u0 == pytest.approx(U0_ORACLE, abs=1e-12)
        assert rep.R0 == pytest.approx(X0_ORACLE, abs=1e-12)
        assert math.exp(rep.z0) == pytest.approx(rep.x0, rel=1e-15)

    def test_k1_2_k2_1(self):
        c = AggregateConstants(2.0, 1.0)
        assert c.z0 == pytest.approx(math.log(1.5), rel=1e-15)
        assert c.u0 == -0.5

    def test_dimensional_resource(self):
        dm = make_model([0.5, 0.5], [1, 1], [1.0, 2.0], [[0, 1], [1, 0]], r=2.0, Rmax=4.0)
        rep = equilibrium(nondimensionalize(dm))
        # rho = (0.25, 0.5), equal eco weights -> x0 = 1 + mean(rho - 1)
        assert rep.x0 == pytest.approx(0.375)
        assert rep.R0 == pytest.approx(1.5)

    def test_degenerate_ratio(self):
        with pytest.raises(DegenerateRatio):
            equilibrium(model_with([-0.5, -0.2]))

    def test_failed_assumptions_keep_aggregates(self):
        rep = equilibrium(model_with([1.0, 2.5]))
        assert not rep.assumptions_ok
        assert rep.y_star is None
        assert rep.x0 == pytest.approx(1.75)

    @pytest.mark.parametrize("preset", STARS)
    def test_report_identities(self, preset):
        m = star_model(preset)
        rep = equilibrium(m)
        assert abs(sum(rep.y_star) - rep.u0) < 1e-10
        assert abs(1 - rep.x0 - rep.u0) < 1e-12
        np.testing.assert_allclose(aggregate_vector_field([rep.z0, rep.u0], aggregate_constants(m)), 0.0, atol=1e-10)
        np.testing.assert_allclose(nondim_vector_field([rep.x0, *rep.y_star], m), 0.0, atol=1e-10)

    def test_network_independence(self):
        reps = [equilibrium(star_model(p)) for p in STARS]
        for r in reps[1:]:
            assert (r.K1, r.K2, r.z0, r.u0) == (reps[0].K1, reps[0].K2, reps[0].z0, reps[0].u0)


class TestIndividualEquilibrium:
    def test_symmetric_identical_agents(self):
        w = [[0, .5, .5], [.5, 0, .5], [.5, .5, 0]]
        m = nondimensionalize(make_model([0.4] * 3, [0.7] * 3, [0.6] * 3, w))
        rep = equilibrium(m)
        np.testing.assert_allclose(rep.y_star, rep.u0 / 3, rtol=1e-12)

    def test_skewed_star_high_threshold_agent_contributes(self):
        rep = equilibrium(star_model("star-skewed"))
        assert R_THRESH[3] == 1.1745
        assert rep.y_star[3] < 0

    def test_random_leaderless_networks_are_balanced(self):
        rng = np.random.default_rng(12)
        for _ in range(30):
            n = int(rng.integers(2, 15))
            synth = synthesize_orientations(random_strongly_connected(rng, n), rng.uniform(0.1, 1, n), rng.uniform(0.1, 1.9, n))
            m = nondimensionalize(synth.model)
            rep = equilibrium(m)
            np.testing.assert_allclose(nondim_vector_field([rep.x0, *rep.y_star], m), 0.0, atol=1e-10)

    def test_disconnected_weights(self):
        w = [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]
        m = nondimensionalize(make_model([0.3] * 4, [0.5] * 4, [0.5, 0.6, 0.7, 0.8], w))
        with pytest.raises(SingularBeyondKernel):
            individual_equilibrium(m, 0.65, 0.35)

    def test_not_leaderless_is_incompatible(self):
        w = [[0, .5, .5], [.5, 0, .5], [.2, .8, 0]]
        m = nondimensionalize(make_model([0.3, 0.5, 0.4], [0.1, 0.5, 0.9], [0.2, 0.9, 0.6], w))
        c = aggregate_constants(m)
        with pytest.raises(IncompatibleEquilibrium):
            individual_equilibrium(m, c.x0, c.u0)


class TestShiftedAndLyapunov:
    def test_origin_fixed(self):
        np.testing.assert_array_equal(shifted_vector_field([0.0, 0.0], REF), 0.0)

    def test_hand_value(self):
        np.testing.assert_array_equal(shifted_vector_field([0.0, 1.0], REF), [-1.0, 0.0])

    def test_change_of_variables(self):
        rng = np.random.default_rng(0)
        z = rng.uniform(-3, 1, 100)
        u = rng.uniform(-2, 2, 100)
        agg = aggregate_vector_field(np.column_stack([z, u]), REF)
        sh = shifted_vector_field(np.column_stack([z - REF.z0, u - REF.u0]), REF)
        np.testing.assert_allclose(sh, agg, rtol=0, atol=1e-12)

    def test_degenerate_sum(self):
        c = AggregateConstants(1.0, -1.0)
        for fn in (lambda: shifted_vector_field([0, 0], c), lambda: lyapunov(0, 0, c), lambda: lyapunov_rate(0, 0, c)):
            with pytest.raises(DegenerateSum):
                fn()

    def test_lyapunov_values(self):
        assert lyapunov(0.0, 0.0, REF) == 0.0
        assert lyapunov(0.0, 2.0, AggregateConstants(2.0, -1.0)) == 2.0
        for v in (-3.0, -1e-3, 1e-3, 2.0):
            assert lyapunov(v, 0.0, REF) == pytest.approx(math.exp(v) - v - 1, rel=1e-12)
            assert lyapunov(v, 0.0, REF) > 0

    def test_rate_hand_values(self):
        np.testing.assert_array_equal(lyapunov_rate(0.0, np.linspace(-5, 5, 11), REF), 0.0)
        c = AggregateConstants(1.5, 0.0)  # z0 = 0
        assert lyapunov_rate(math.log(2), 3.7, c) == pytest.approx(-1.0, rel=1e-15)

    def test_rate_matches_chain_rule(self):
        rng = np.random.default_rng(1)
        v = rng.uniform(-2, 2, 1000)
        w = rng.uniform(-2, 2, 1000)
        k = REF.K1 + REF.K2
        field = shifted_vector_field(np.column_stack([v, w]), REF)
        chain = np.expm1(v) * field[:, 0] + (w / k) * field[:, 1]
        assert np.max(np.abs(chain - lyapunov_rate(v, w, REF))) < 1e-12

    def test_rate_matches_finite_differences(self):
        rng = np.random.default_rng(2)
        h = 1e-6
        for v, w in rng.uniform(-1.5, 1.5, (50, 2)):
            dv, dw = shifted_vector_field([v, w], REF)
            gv = (lyapunov(v + h, w, REF) - lyapunov(v - h, w, REF)) / (2 * h)
            gw = (lyapunov(v, w + h, REF) - lyapunov(v, w - h, REF)) / (2 * h)
            assert gv * dv + gw * dw == pytest.approx(lyapunov_rate(v, w, REF), abs=1e-7)

    def test_positive_definite_on_annuli(self):
        theta = np.linspace(0, 2 * np.pi, 720, endpoint=False)
        with np.errstate(over="ignore"):
            for radius in np.logspace(-6, 3, 19):
                V = lyapunov(radius * np.cos(theta), radius * np.sin(theta), REF)
                assert np.all(V > 0)

    def test_radially_unbounded(self):
        theta = np.linspace(0, 2 * np.pi, 72, endpoint=False)
        t = np.logspace(-3, 2, 200)
        with np.errstate(over="ignore"):
            for th in theta:
                V = lyapunov(t * np.cos(th), t * np.sin(th), REF)
                assert np.all(np.diff(V) > 0)
                assert V[-1] >= 99.0  # slowest growth is linear, along the negative v axis

    def test_rate_nonpositive(self):
        rng = np.random.default_rng(3)
        vw = rng.uniform(-10, 10, (5000, 2))
        assert np.all(lyapunov_rate(vw[:, 0], vw[:, 1], REF) <= 0)
        assert np.all(lyapunov_rate(vw[:, 0], vw[:, 1], REF)[vw[:, 0] != 0] < 0)
