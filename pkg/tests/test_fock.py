import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from optocool import fock, noise
from optocool.errors import CutoffTooSmall, NegativeRate, Unstable
from optocool.noise import RateSet

NO_LIGHT = RateSet(0.0, 0.0, 0.0)


def test_thermal_chain_bose_ratio():
    chain = fock.build_chain(NO_LIGHT, 1e-3, 4.0, 200)
    assert chain.ratio == pytest.approx(4.0 / 5.0, rel=1e-15)
    state = fock.steady_state(chain)
    n = np.arange(201)
    bose = (4.0 / 5.0) ** n / 5.0
    assert np.allclose(state.probabilities, bose, rtol=1e-9, atol=1e-18)
    assert state.mean == pytest.approx(4.0, rel=1e-8)


def test_generator_columns_sum_to_zero(fig3):
    chain = fock.build_chain(noise.golden_rule_rates(fig3), fig3.gamma_m, fig3.n_th, 300)
    gen = chain.generator().toarray()
    # The diagonal is minus the column's off-diagonal sum; only rounding remains.
    scale = np.abs(np.diag(gen))
    assert np.all(np.abs(gen.sum(axis=0)) <= 4 * np.spacing(scale))
    assert np.all(np.diag(gen, 1) >= 0) and np.all(np.diag(gen, -1) >= 0)


def test_fig3_detailed_balance_ratio(fig3):
    rates = noise.golden_rule_rates(fig3)
    chain = fock.build_chain(rates, fig3.gamma_m, fig3.n_th, 50)
    expected = (rates.gamma_up + fig3.gamma_m * fig3.n_th) / (rates.gamma_down + fig3.gamma_m * (fig3.n_th + 1))
    assert chain.ratio == expected
    up, down = chain.up_rates(), chain.down_rates()
    np.testing.assert_allclose(up[:-1] / down[1:], expected, rtol=1e-14)


def test_negative_rate_rejected():
    with pytest.raises(NegativeRate):
        fock.build_chain(RateSet(-1.0, 0.0, -1.0), 1e-3, 1.0, 10)
    with pytest.raises(ValueError):
        fock.build_chain(NO_LIGHT, 1e-3, 1.0, 1)


def test_two_solvers_agree(fig3):
    rates = noise.golden_rule_rates(fig3.replace(n_p=0.05))
    chain, state = fock.auto_steady_state(rates, fig3.gamma_m, fig3.n_th)
    oracle = fock.steady_state_nullspace(chain)
    np.testing.assert_allclose(state.probabilities, oracle.probabilities, rtol=0, atol=1e-10)
    assert state.mean == pytest.approx(oracle.mean, rel=1e-10)


def test_strong_cooling_reaches_quantum_limit(fig3):
    p = fig3.replace(gamma_m=1e-15)
    rates = noise.golden_rule_rates(p)
    _, state = fock.auto_steady_state(rates, p.gamma_m, p.n_th)
    assert state.mean == pytest.approx(noise.quantum_limit(p), rel=1e-6)


def test_cutoff_too_small_then_auto_doubles():
    chain = fock.build_chain(NO_LIGHT, 1e-3, 100.0, 60)
    with pytest.raises(CutoffTooSmall):
        fock.steady_state(chain)
    chain, state = fock.auto_steady_state(NO_LIGHT, 1e-3, 100.0, tail_threshold=1e-14)
    assert chain.n_max > fock.default_cutoff(100.0)
    assert state.tail_mass <= 1e-14


def test_heating_chain_unstable(fig3):
    rates = noise.golden_rule_rates(fig3.replace(detuning=1.0))
    with pytest.raises(Unstable):
        fock.steady_state(fock.build_chain(rates, fig3.gamma_m, fig3.n_th, 100))


def test_cutoff_doubling_is_converged():
    rates = RateSet(0.02, 0.001, 0.019)
    chain, state = fock.auto_steady_state(rates, 1e-3, 3.0)
    doubled = fock.steady_state(fock.build_chain(rates, 1e-3, 3.0, 2 * chain.n_max))
    assert abs(doubled.mean / state.mean - 1) < 1e-8


def test_evolve_mean_closed_form():
    rates = RateSet(0.02, 0.001, 0.019)
    gm, n_th = 1e-3, 30.0
    total = gm + rates.gamma_opt
    n_ss = (gm * n_th + rates.gamma_up) / total
    assert fock.evolve_mean(10.0, rates, gm, n_th, 0.0) == 10.0
    assert fock.evolve_mean(10.0, rates, gm, n_th, 1e6) == pytest.approx(n_ss, rel=1e-14)
    half = fock.evolve_mean(10.0, rates, gm, n_th, math.log(2) / total)
    assert half == pytest.approx(0.5 * (10.0 + n_ss), rel=1e-14)
    with pytest.raises(Unstable):
        fock.evolve_mean(1.0, RateSet(0.0, 0.1, -0.1), gm, n_th, 1.0)


def test_chain_ode_matches_closed_form():
    rates = RateSet(0.05, 0.002, 0.048)
    gm, n_th, n0 = 2e-3, 40.0, 15.0
    n_ss = (gm * n_th + rates.gamma_up) / (gm + rates.gamma_opt)
    n_max = fock.default_cutoff(max(n0, n_ss))
    chain = fock.build_chain(rates, gm, n_th, n_max)
    times = np.linspace(0, 4 / (gm + rates.gamma_opt), 12)
    pops = fock.evolve_chain(chain, fock.thermal_distribution(n0, n_max), times)
    np.testing.assert_allclose(pops.sum(axis=1), 1.0, rtol=0, atol=1e-9)
    np.testing.assert_allclose(fock.mean_trajectory(pops),
                               fock.evolve_mean(n0, rates, gm, n_th, times), rtol=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 0.1), st.floats(0.0, 0.1), st.floats(1e-4, 1e-2), st.floats(0, 20),
       st.floats(0, 20))
def test_probability_conserved(down, up, gm, n_th, n0):
    chain = fock.build_chain(RateSet(down, up, down - up), gm, n_th, 60)
    times = np.linspace(0, 200, 9)
    pops = fock.evolve_chain(chain, fock.thermal_distribution(n0, 60), times)
    assert np.all(np.abs(pops.sum(axis=1) - 1) < 1e-9)
