import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lineinv import dispersion as ds, inverse
from lineinv.dispersion import Classification
from lineinv.errors import NegativeDiscriminant, WindowTooSmall
from lineinv.potentials import SquareWell


def test_resonances(pipelines):
    assert np.allclose(pipelines["5"].resonances.betas, [1.54334, 1.5857], atol=1e-3)
    assert np.allclose(pipelines["20"].resonances.betas, [1.93021, 3.92556], atol=1e-3)
    assert np.allclose(pipelines["130"].resonances.betas,
                       [4.87295, 8.22607, 8.32865, 10.0879, 10.7407, 11.085], atol=5e-3)


def test_resonances_are_zeros(pipelines):
    for key, p in pipelines.items():
        m = ds.SquareWellModel(ds.parse_epsilon({"pi2": "pi^2"}.get(key, key)))
        for b in p.resonances.betas:
            assert abs(ds.inv_tzero(m, -1j * b)) < 1e-8
        assert list(p.resonances.betas) == sorted(set(p.resonances.betas))


def test_resonances_include_bound_states(pipelines):
    for key, p in pipelines.items():
        m = ds.SquareWellModel(ds.parse_epsilon({"pi2": "pi^2"}.get(key, key)))
        for xi in m.xis():
            assert min(abs(b - xi) for b in p.resonances.betas) < 1e-8


def test_resonances_from_forward_engine():
    r = inverse.find_resonances(ds.FromPotential(SquareWell(5.0)))
    assert np.allclose(r.betas, [1.5433388586, 1.5856957392], atol=1e-7)


def test_window_too_small():
    with pytest.raises(WindowTooSmall):
        inverse.find_resonances(ds.SquareWellModel(5.0), window=(0.0, 1.0))


@pytest.mark.parametrize("cl,Z,expected", [
    (Classification("generic", -1.0, "odd"), 0, [1]),
    (Classification("exceptional", 0.0), 0, [0, 1]),
    (Classification("generic", 1.0, "even"), 3, [0, 2, 4]),
    (Classification("generic", -1.0, "odd"), 3, [1, 3]),
])
def test_allowed_N(cl, Z, expected):
    assert inverse.allowed_N(cl, Z) == expected


def test_allowed_N_from_pipeline(pipelines):
    assert pipelines["5"].allowed == [1]
    assert pipelines["pi2"].allowed == [0, 1]
    assert pipelines["130"].allowed == [0, 2, 4]


@pytest.mark.parametrize("key,c0", [("20", 6.24635), ("130", 23.968), ("pi2", 3.38537)])
def test_c0(pipelines, key, c0):
    assert pipelines[key].c0 == pytest.approx(c0, abs=5e-3 if key == "130" else 1e-3)


def test_c0_negative_discriminant():
    with pytest.raises(NegativeDiscriminant):
        inverse.c0_from_reference(SquareWell(5.0), [3.0])


def test_candidates_eps20(pipelines):
    c = pipelines["20"].candidates
    assert [x.N for x in c] == [0, 2]
    assert [x.c_n for x in c] == pytest.approx([6.24635, 20.0], abs=1e-3)


def test_candidates_eps130(pipelines):
    c = pipelines["130"].candidates
    b = pipelines["130"].resonances.betas
    four = [x for x in c if x.N == 4]
    assert [x.c_n for x in four] == pytest.approx([130, 130.432, 134.287, 134.705], abs=5e-2)
    two = {x.kappas for x in c if x.N == 2}
    assert (b[0], b[1]) in two and (b[1], b[2]) not in two
    assert len(two) == 5 and len(c) == 10


def test_candidate_invariants(pipelines):
    for p in pipelines.values():
        cs = p.candidates
        assert [x.c_n for x in cs] == sorted(x.c_n for x in cs)
        if len(cs) > 1:
            assert cs[0].c_n < cs[1].c_n
        for x in cs:
            assert x.sign_rule_ok()
            assert set(x.kappas) <= set(p.resonances.betas)
            assert list(x.kappas) == sorted(x.kappas)
            ladder = math.sqrt(p.c0 ** 2 + 16 / 3 * sum(k ** 3 for k in x.kappas))
            assert abs(x.c_n - ladder) <= 1e-10 * ladder


def test_well_is_on_its_ladder(pipelines):
    for key, p in pipelines.items():
        eps = ds.parse_epsilon({"pi2": "pi^2"}.get(key, key))
        xis = ds.SquareWellModel(eps).xis()
        match = [x for x in p.candidates
                 if len(x.kappas) == len(xis) and np.allclose(x.kappas, xis, atol=1e-9)]
        assert len(match) == 1 and match[0].c_n == pytest.approx(eps, rel=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 50.0), st.lists(st.floats(0.01, 20.0), max_size=4), st.floats(0.01, 20.0))
def test_ladder_monotone(c0, kappas, extra):
    assert inverse.ladder(c0, kappas + [extra]) > inverse.ladder(c0, kappas)


def test_disambiguate(pipelines):
    c = pipelines["5"].candidates
    r = inverse.disambiguate(c, 4.9)
    assert r.status == "unique" and r.candidate.kappas[0] == pytest.approx(1.54334, abs=1e-3)
    assert inverse.disambiguate(c, 5.0).status == "ambiguous"
    assert inverse.disambiguate(c, 4.0).status == "none"
    r = inverse.disambiguate(pipelines["130"].candidates, 100)
    assert r.status == "ambiguous" and len(r.candidates) == 4


def test_disambiguation_json(pipelines):
    import json
    r = json.loads(inverse.disambiguate(pipelines["5"].candidates, 4.9).to_json())
    assert r["status"] == "unique" and len(r["candidates"]) == 1


@pytest.mark.parametrize("index,norm", [(0, 4.83126), (1, 5.0)])
def test_verify_eps5(pipelines, index, norm):
    cand = pipelines["5"].candidates[index]
    v = inverse.verify_candidate(cand, ds.SquareWellModel(5.0), SquareWell(5.0))
    assert v.ok()
    assert v.norm == pytest.approx(norm, abs=1e-3)
    assert np.allclose(v.kappas_found, cand.kappas, atol=1e-6)


def test_verify_exceptional_n0(pipelines):
    cand = pipelines["pi2"].candidates[0]
    v = inverse.verify_candidate(cand, ds.SquareWellModel(math.pi ** 2), SquareWell(math.pi ** 2))
    assert cand.N == 0 and v.ok() and v.kappas_found == ()
    assert v.norm == pytest.approx(3.38537, abs=1e-3)


def test_verified_eps5_beta2_is_the_well(pipelines):
    cand = pipelines["5"].candidates[1]
    v = inverse.verify_candidate(cand, ds.SquareWellModel(5.0), SquareWell(5.0))
    W = v.potential
    inside = (W.x > 0.05) & (W.x < 0.95)
    outside = (W.x < -0.05) | (W.x > 1.05)
    assert np.max(np.abs(W.node_values[inside] + 5.0)) < 1e-6
    assert np.max(np.abs(W.node_values[outside])) < 1e-6
