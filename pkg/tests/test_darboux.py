import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lineinv import darboux, jost
from lineinv.errors import (HasBoundStates, NoSuchBoundState, NotExceptional,
                            OrderingViolation)
from lineinv.potentials import (PiecewiseConstant, SampledGrid, SquareWell, evaluate,
                                norms, zero_potential)

K = np.linspace(0.1, 6.0, 25)


def _scatter(V):
    m = V.mesh() if isinstance(V, darboux.DressedPotential) else V.mesh(None)
    c = jost.coefficients(m, K)
    T = 1 / c.inv_t
    return T, c.l_over_t * T, c.r_over_t * T


def test_one_soliton_closed_form(soliton):
    _, V1, step = soliton
    assert np.max(np.abs(V1.node_values + 2 / np.cosh(V1.x) ** 2)) < 1e-6
    assert np.all(step.chi > 0)
    assert step.check(1e-6)
    assert np.max(np.abs(step.chi - 2 * np.cosh(step.x))) < 1e-9 * np.max(step.chi)


def test_one_soliton_bound_state(soliton):
    _, V1, _ = soliton
    bs = jost.find_bound_states(V1.mesh())
    assert bs.N == 1 and abs(bs.kappas[0] - 1) < 1e-6


@pytest.mark.parametrize("n,expected", [(0, -4.0), (1, 16 / 3), (2, -128 / 15)])
def test_identity_soliton_values(soliton, n, expected):
    V0, V1, _ = soliton
    r = darboux.integral_identity(V1, V0, 1.0, n)
    assert r.rhs == pytest.approx(expected, rel=1e-15)
    assert r.residual < 1e-8


def test_identity_brute_force_oracle():
    # direct quadrature of (-2 sech^2)^3 on a wide grid, no tail correction
    x = np.linspace(-40, 40, 400001)
    assert np.trapezoid((-2 / np.cosh(x) ** 2) ** 3, x) == pytest.approx(-128 / 15, rel=1e-9)


def test_blaschke_relations_on_square_well():
    V = SquareWell(5.0)
    kap = 2.3
    W, _ = darboux.add_bound_state(V, kap, 0.7)
    T0, L0, R0 = _scatter(V)
    T1, L1, R1 = _scatter(W)
    b = (K + 1j * kap) / (K - 1j * kap)
    assert np.max(np.abs(T1 * (K - 1j * kap) / (K + 1j * kap) - T0)) < 1e-6
    assert np.max(np.abs(L1 + L0 * b)) < 1e-6
    bs = jost.find_bound_states(W.mesh())
    assert np.allclose(bs.kappas, [1.585695739, kap], atol=1e-6)


def test_ordering_violation():
    with pytest.raises(OrderingViolation):
        darboux.add_bound_state(SquareWell(20.0), 1.0, 1.0)


def test_remove_from_bound_state_free_potential():
    with pytest.raises(NoSuchBoundState):
        darboux.remove_bound_state(zero_potential())


def test_remove_soliton_given_as_samples():
    # linear interpolation error of the samples is ~ dx^2 max|V''|/8
    x = np.linspace(-16, 16, 32001)
    V = SampledGrid(x[0], x[1] - x[0], -2 / np.cosh(x) ** 2)
    W = darboux.remove_bound_state(V)
    assert W.bound_states == ()
    assert np.max(np.abs(W.node_values)) < 1e-6


@pytest.mark.parametrize("eps", [5.0, 20.0, 130.0])
def test_roundtrip_remove_readd(eps):
    W = darboux.DressedPotential.wrap(SquareWell(eps))
    kap, g = W.bound_states[-1]
    R = darboux.remove_bound_state(W)
    A, _ = darboux.add_bound_state(R, kap, g)
    ref = evaluate(SquareWell(eps), A.x)
    inside = (A.x > 0) & (A.x < 1)
    assert np.max(np.abs(A.node_values[inside] - ref[inside])) < 1e-5
    assert np.max(np.abs(A.node_values[~inside & ((A.x < 0) | (A.x > 1))])) < 1e-5


def test_remove_keeps_compact_support_and_norm():
    V0 = darboux.remove_bound_state(SquareWell(math.pi ** 2))
    assert V0.bound_states == ()
    assert V0.support == (0.0, 1.0)
    kap = jost.find_bound_states(SquareWell(math.pi ** 2)).kappas
    expected = math.sqrt(math.pi ** 4 - 16 / 3 * float(np.sum(kap ** 3)))
    assert norms(V0).l2 == pytest.approx(expected, rel=1e-8)
    assert jost.find_bound_states(V0.mesh()).N == 0


def test_readd_with_other_gamma_keeps_moduli():
    W = darboux.DressedPotential.wrap(SquareWell(20.0))
    kap, g = W.bound_states[-1]
    R = darboux.remove_bound_state(W)
    A, _ = darboux.add_bound_state(R, kap, 5 * g)
    T0, L0, _ = _scatter(SquareWell(20.0))
    T1, L1, _ = _scatter(A)
    assert np.max(np.abs(np.abs(T1) - np.abs(T0))) < 1e-6
    assert np.max(np.abs(np.abs(L1) - np.abs(L0))) < 1e-6
    inside = (A.x > 0.2) & (A.x < 0.8)
    assert np.max(np.abs(A.node_values[inside] + 20.0)) > 1.0


def test_remove_lower_state():
    W = darboux.DressedPotential.wrap(SquareWell(20.0))
    R = darboux.remove_bound_state(W, 1)
    assert [k for k, _ in R.bound_states] == [W.bound_states[1][0]]
    bs = jost.find_bound_states(R.mesh())
    assert np.allclose(bs.kappas, [W.bound_states[1][0]], atol=1e-6)


@pytest.mark.parametrize("gamma", [0.1, 1.0, 10.0])
@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_identity_gamma_independent(gamma, n):
    V = PiecewiseConstant([0.0, 0.5, 1.2], [-1.0, 2.0])
    W, _ = darboux.add_bound_state(V, 1.3, gamma)
    r = darboux.integral_identity(W, W.parent, 1.3, n)
    assert r.residual < 1e-6


def test_norm_shift_single_and_pair():
    V0 = zero_potential()
    V1, _ = darboux.add_bound_state(V0, 1.0, 1.0)
    assert np.allclose(darboux.norm_shift_report(V0, V1, [1.0]), (-4, 16 / 3), rtol=1e-6)
    for g in (0.3, 3.0):
        A, _ = darboux.add_bound_state(V0, 1.0, g)
        B, _ = darboux.add_bound_state(A, 2.0, g)
        d1, d2 = darboux.norm_shift_report(V0, B, [1.0, 2.0])
        assert d1 == pytest.approx(-12.0, rel=1e-6)
        assert d2 == pytest.approx(48.0, rel=1e-6)


def test_telescoping_and_reflection_signs():
    V0 = PiecewiseConstant([0.0, 1.0], [-1.5])
    kappas = [0.9, 1.6, 2.4]
    levels = [darboux.DressedPotential.wrap(V0)]
    for i, kap in enumerate(kappas):
        levels.append(darboux.add_bound_state(levels[-1], kap, 0.5 + i)[0])
    VN = levels[-1]
    per_step = sum(darboux.integral_identity(VN if j == 3 else levels[j], levels[j - 1],
                                             kappas[j - 1], 1).lhs for j in (1, 2, 3))
    _, d2 = darboux.norm_shift_report(V0, VN, kappas)
    assert per_step == pytest.approx(d2, rel=1e-6)
    _, L0, _ = _scatter(V0)
    _, LN, _ = _scatter(VN)
    prod = np.prod([(K - 1j * k) / (K + 1j * k) for k in kappas], axis=0)
    assert np.max(np.abs(LN * (-1) ** 3 * prod - L0)) < 1e-5


@pytest.mark.parametrize("n", range(11))
def test_binomial_sum_identity(n):
    exact = darboux.binomial_sum(n)
    closed = Fraction(2 ** n * math.factorial(n)) / math.prod(range(1, 2 * n + 2, 2))
    assert exact == closed
    x = np.linspace(0, 1, 200001)
    assert abs(float(exact) - np.trapezoid((1 - x * x) ** n, x)) < 1e-10


def test_closed_form_constant_low_orders():
    for kap in (0.3, 1.0, 2.7):
        assert darboux.identity_closed_form(kap, 0) == pytest.approx(-4 * kap)
        assert darboux.identity_closed_form(kap, 1) == pytest.approx(16 * kap ** 3 / 3)


def test_signflip_requires_exceptional_bound_state_free():
    with pytest.raises(HasBoundStates):
        darboux.signflip_partner(SquareWell(math.pi ** 2))
    with pytest.raises(NotExceptional):
        darboux.signflip_partner(darboux.remove_bound_state(SquareWell(5.0)))


def test_signflip_properties(exceptional_pair):
    V1, V2 = exceptional_pair
    T1, L1, R1 = _scatter(V1)
    T2, L2, R2 = _scatter(V2)
    assert np.max(np.abs(T1 - T2)) < 1e-5
    assert np.max(np.abs(L1 + L2)) < 1e-5
    assert np.max(np.abs(R1 + R2)) < 1e-5
    for n in range(4):
        assert abs(darboux.moment_difference(V2, V1, n)) < 1e-6
    assert V2.vplus[0] == pytest.approx(-V1.vplus[0], abs=1e-4)
    assert np.all(evaluate(V2, [-1.0, -1e-9, 1 + 1e-9, 3.0]) == 0.0)
    assert norms(V1).integral == pytest.approx(norms(V2).integral, abs=1e-8)
    assert norms(V1).l2 == pytest.approx(norms(V2).l2, rel=1e-8)


def test_signflip_involution(exceptional_pair):
    V1, V2 = exceptional_pair
    V3 = darboux.signflip_partner(V2)
    assert np.max(np.abs(V3.vplus - V1.vplus)) < 1e-6
    assert np.max(np.abs(V3.vminus - V1.vminus)) < 1e-6


@settings(max_examples=10, deadline=None)
@given(st.floats(0.3, 2.5), st.floats(0.1, 10.0))
def test_step_invariants(kappa, gamma):
    _, step = darboux.add_bound_state(zero_potential(), kappa, gamma)
    assert np.all(step.chi > 0)
    assert abs(step.mu[-1] - kappa) <= 1e-6 and abs(step.mu[0] + kappa) <= 1e-6


def test_grid_export():
    V0 = zero_potential()
    V1, _ = darboux.add_bound_state(V0, 1.0, 1.0)
    g = V1.to_grid()
    assert isinstance(g, SampledGrid)
    assert set(V1.to_dict()) == {"form", "x0", "dx", "samples"}
    x = np.linspace(-3, 3, 7)
    assert np.max(np.abs(evaluate(g, x) + 2 / np.cosh(x) ** 2)) < 1e-4
