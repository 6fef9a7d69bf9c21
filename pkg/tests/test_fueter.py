import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qtwistor.fueter import (
    DEFAULT_LINES,
    c_operator,
    composition_obstruction_check,
    fueter_span,
    fueter_span_check,
    fueter_split,
    fueter_suite,
    is_fueter,
    quaternionic_basis,
    random_sphere_map,
    symmetry_s_d,
)
from qtwistor.hlinear import HMatrix, RealLinearMap, embed, left_mult_operator
from qtwistor.quaternion import I, J, K, random_oriented_triple, random_unit
from qtwistor.qlinear import SphereMap, decompose, is_quaternionic, quaternionic_map
from tests.strategies import seeds

dims = st.sampled_from([(1, 1), (1, 2), (2, 1), (2, 2)])


def quaternionic_for(T, rng, m, n):
    return quaternionic_map(T.unit(), HMatrix.random(rng, m, n))


@given(dims, seeds)
@settings(max_examples=20)
def test_minimal_polynomial(mn, seed):
    m, n = mn
    C = c_operator(random_sphere_map(np.random.default_rng(seed)), m, n)
    assert C.minpoly_residual() < 1e-9


@pytest.mark.parametrize("m,n", [(1, 1), (1, 2), (2, 2)])
def test_eigenvalue_multiplicities(rng, m, n):
    C = c_operator(random_sphere_map(rng), m, n)
    ev = np.linalg.eigvals(C.matrix)
    assert np.sum(np.abs(ev - 1.0) < 1e-8) == 12 * m * n
    assert np.sum(np.abs(ev + 3.0) < 1e-8) == 4 * m * n
    assert abs(np.trace(C.matrix)) < 1e-10
    assert np.linalg.matrix_rank(C.q_projector) == 4 * m * n
    assert np.linalg.matrix_rank(C.f_projector) == 12 * m * n


@given(dims, seeds)
@settings(max_examples=20)
def test_c_operator_independent_of_basis(mn, seed):
    m, n = mn
    rng = np.random.default_rng(seed)
    T = random_sphere_map(rng)
    reference = c_operator(T, m, n).matrix
    for _ in range(8):
        other = c_operator(T, m, n, random_oriented_triple(rng)).matrix
        assert np.abs(other - reference).max() < 1e-10


@given(dims, seeds)
@settings(max_examples=20)
def test_quaternionic_maps_are_minus_three_eigenvectors(mn, seed):
    m, n = mn
    rng = np.random.default_rng(seed)
    T = random_sphere_map(rng)
    t = quaternionic_for(T, rng, m, n)
    C = c_operator(T, m, n)
    assert C(t).allclose(-3.0 * t, atol=1e-10 * t.norm())
    assert not is_fueter(t, T)


@given(dims, seeds)
@settings(max_examples=20)
def test_split_properties(mn, seed):
    m, n = mn
    rng = np.random.default_rng(seed)
    T = random_sphere_map(rng)
    t = RealLinearMap(rng.standard_normal((4 * m, 4 * n)), m, n)
    q_part, f_part = fueter_split(t, T)
    C = c_operator(T, m, n)
    assert (q_part + f_part).allclose(t, atol=1e-12)
    assert C(q_part).allclose(-3.0 * q_part, atol=1e-10)
    assert C(f_part).allclose(f_part, atol=1e-10)
    assert is_fueter(f_part, T)
    S = is_quaternionic(q_part)
    assert S is not None and S.allclose(T, atol=1e-8)


def test_split_of_quaternionic_and_zero(rng):
    T = random_sphere_map(rng)
    t = quaternionic_for(T, rng, 1, 1)
    q_part, f_part = fueter_split(t, T)
    assert q_part.allclose(t, atol=1e-12) and f_part.norm() < 1e-12
    z = RealLinearMap.zeros(1, 2)
    assert all(p.norm() == 0 for p in fueter_split(z, T))
    assert is_fueter(z, T)


@given(seeds)
@settings(max_examples=20)
def test_q_projector_image_is_the_decomposable_maps(seed):
    rng = np.random.default_rng(seed)
    m, n = 1, 2
    T = random_sphere_map(rng)
    PQ = c_operator(T, m, n).q_projector
    # maps X -> aXA with rotation_of(a) = T are fixed by P_Q
    t = quaternionic_for(T, rng, m, n)
    v = t.matrix.reshape(-1)
    np.testing.assert_allclose(PQ @ v, v, atol=1e-10 * np.linalg.norm(v))
    # anything in the image of P_Q decomposes with sphere map T
    w = PQ @ rng.standard_normal(16 * m * n)
    d = decompose(RealLinearMap(w.reshape(4 * m, 4 * n), m, n))
    assert d.sphere_map.allclose(T, atol=1e-8)


def test_symmetry_about_i():
    S = symmetry_s_d(I)
    assert S(I).isclose(I)
    assert S(J).isclose(-J)
    assert S(K).isclose(-K)


@given(seeds)
def test_symmetry_is_rotational_involution(seed):
    u = random_unit(np.random.default_rng(seed))
    S = symmetry_s_d(u.vector if np.linalg.norm(u.vector) > 1e-6 else [1.0, 0, 0])
    assert (S @ S).allclose(SphereMap.identity(), atol=1e-12)
    assert np.linalg.det(S.rotation) == pytest.approx(1.0)
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(S.rotation)), [-1, -1, 1], atol=1e-12)


@pytest.mark.parametrize("m,n", [(1, 1), (1, 2), (2, 2)])
def test_span_certificate(rng, m, n):
    T = random_sphere_map(rng)
    cert = fueter_span(T, m, n)
    assert cert.span_dim == 12 * m * n
    assert cert.inclusion_residual < 1e-12
    assert fueter_span_check(T, m, n)
    assert fueter_span_check(SphereMap.identity(), 1, 1)


def test_quaternionic_for_symmetric_sphere_map_is_fueter(rng):
    T = random_sphere_map(rng)
    for d in DEFAULT_LINES:
        for t in quaternionic_basis(T @ symmetry_s_d(d), 1, 1)[:2]:
            assert is_fueter(t, T)


def test_axis_lines_alone_span(rng):
    # recorded measurement, not a general claim: at m = n = 1 the three axes already suffice
    cert = fueter_span(SphereMap.identity(), 1, 1, lines=DEFAULT_LINES[:3])
    assert cert.span_dim == 12


def test_composition_obstruction(rng):
    T1, T2 = random_sphere_map(rng), random_sphere_map(rng)
    report = composition_obstruction_check(T1, T2, [0.3, -0.2, 0.9], trials=64, seed=3)
    assert report.failures == 0
    assert report.factor_failures == 0
    assert report.zero_composition_fueter
    assert report.holds


def test_fueter_suite_report(rng):
    report = fueter_suite(1, 2, trials=32, seed=1)
    assert report.holds(1, 2)
    obj = json.loads(json.dumps(report.to_json()))
    assert set(obj) == {"minpoly_residual", "dim_Q", "dim_F", "span_dim", "trials", "failures"}
    assert (obj["dim_Q"], obj["dim_F"], obj["span_dim"]) == (8, 24, 24)


def test_c_operator_applies_the_defining_sum(rng):
    T = random_sphere_map(rng)
    t = RealLinearMap(rng.standard_normal((4, 8)), 1, 2)
    direct = sum(
        (left_mult_operator(T(e), 2) @ t @ left_mult_operator(e, 1) for e in (I, J, K)),
        start=RealLinearMap.zeros(1, 2),
    )
    assert c_operator(T, 1, 2)(t).allclose(direct, atol=1e-12)
    assert is_fueter(embed(HMatrix.random(rng, 1, 1)) @ RealLinearMap.zeros(1, 1), T)
