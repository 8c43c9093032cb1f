import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lineinv import jost
from lineinv.dispersion import SquareWellModel
from lineinv.errors import HasBoundStates, NotExceptional, StepTooCoarse
from lineinv.potentials import PiecewiseConstant, SquareWell, zero_potential

K = np.linspace(0.05, 12.0, 41)


def test_free_potential_is_transparent():
    sc = jost.scattering_coefficients(zero_potential(), K)
    assert np.max(np.abs(sc.T - 1)) < 1e-12
    assert np.max(np.abs(sc.L)) < 1e-12


@pytest.mark.parametrize("eps", [5.0, math.pi ** 2, 20.0, 130.0])
def test_square_well_matches_closed_form(eps):
    c = jost.coefficients(SquareWell(eps), K)
    m = SquareWellModel(eps)
    assert np.max(np.abs(c.inv_t - m.inv_tau(K))) < 1e-8
    assert np.max(np.abs(c.l_over_t - m.D(K))) < 1e-8


def test_closed_form_agreement_off_axis():
    k = np.array([0.5 + 1.0j, -2.0 + 0.3j, 0.7 - 1.1j, -3j])
    c = jost.coefficients(SquareWell(20.0), k)
    assert np.max(np.abs(c.inv_t - SquareWellModel(20.0).inv_tau(k))) < 1e-8
    # 1/T computed from f_r agrees with 1/T from f_l
    assert np.max(np.abs(c.inv_t - c.inv_t_right)) < 1e-10


def test_wronskian_constant_and_equal_to_transmission():
    jp = jost.solve_jost(SquareWell(20.0), 1.7)
    assert jp.wronskian_spread() < 1e-10
    T = 1 / jost.inverse_transmission(SquareWell(20.0), [1.7])[0]
    assert abs(jp.wronskian()[0] + 2j * 1.7 / T) < 1e-9


@pytest.mark.parametrize("eps,expected", [
    (5.0, [1.585695739]),
    (math.pi ** 2, [2.525881507]),
    (20.0, [1.9302084, 3.9255596]),
    (130.0, [4.87294804, 8.22607348, 10.08790504, 11.08495754]),
])
def test_square_well_bound_states(eps, expected):
    bs = jost.find_bound_states(SquareWell(eps))
    assert np.allclose(bs.kappas, expected, atol=1e-7)
    assert bs.sign_rule_ok()


@pytest.mark.parametrize("eps", [3.0, 5.0, 20.0, 50.0, 130.0])
def test_bound_state_count_generic(eps):
    # floor(sqrt(eps)/pi) + 1 away from the exceptional depths (m pi)^2
    assert jost.find_bound_states(SquareWell(eps)).N == int(math.sqrt(eps) / math.pi) + 1


def test_gamma_is_D_at_bound_state():
    for eps in (5.0, 20.0):
        bs = jost.find_bound_states(SquareWell(eps))
        D = SquareWellModel(eps).D(1j * bs.kappas).real
        assert np.allclose(bs.gammas, D, rtol=1e-7)


def test_transmission_at_zero_dichotomy():
    assert abs(jost.transmission_at_zero(SquareWell(5.0))) < 1e-6
    assert abs(abs(jost.transmission_at_zero(SquareWell(math.pi ** 2))) - 1) < 1e-6


def test_zero_energy_logderivative_contract():
    with pytest.raises(NotExceptional):
        jost.zero_energy_logderivative(SquareWell(5.0))
    with pytest.raises(HasBoundStates):
        jost.zero_energy_logderivative(SquareWell(math.pi ** 2))


def test_step_too_coarse():
    with pytest.raises(StepTooCoarse):
        jost.coefficients(SquareWell(130.0), [40.0], step=0.05)


def test_adaptive_step_converges():
    sc = jost.scattering_coefficients(SquareWell(130.0), np.array([0.5, 30.0]))
    ref = 1 / SquareWellModel(130.0).inv_tau(np.array([0.5, 30.0]))
    assert np.max(np.abs(sc.T - ref)) < 1e-8


def test_csv_has_check_column():
    sc = jost.scattering_coefficients(SquareWell(5.0), K[:3])
    lines = sc.to_csv(check=True).splitlines()
    assert lines[0] == "k,reT,imT,reL,imL,reR,imR,unitarity"
    assert len(lines) == 4 and len(lines[1].split(",")) == 8


piecewise = st.lists(st.floats(-30, 30, allow_nan=False), min_size=1, max_size=5).map(
    lambda v: PiecewiseConstant(np.linspace(-0.7, 0.9, len(v) + 1), v))


@settings(max_examples=25, deadline=None)
@given(piecewise)
def test_unitarity_and_reciprocity(V):
    c = jost.coefficients(V, K)
    T = 1 / c.inv_t
    L, R = c.l_over_t * T, c.r_over_t * T
    assert np.max(np.abs(np.abs(T) ** 2 + np.abs(L) ** 2 - 1)) < 1e-8
    assert np.max(np.abs(np.abs(R) - np.abs(L))) < 1e-8
    # conj(T) R + conj(L) T = 0 for real potentials
    assert np.max(np.abs(np.conj(T) * R + np.conj(L) * T)) < 1e-8


@settings(max_examples=25, deadline=None)
@given(piecewise)
def test_reality_symmetry(V):
    c_plus = jost.coefficients(V, K)
    c_minus = jost.coefficients(V, -K)
    assert np.max(np.abs(c_minus.inv_t - np.conj(c_plus.inv_t))) < 1e-8
    assert np.max(np.abs(c_minus.l_over_t - np.conj(c_plus.l_over_t))) < 1e-8
