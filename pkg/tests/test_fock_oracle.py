import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from descff.algebra_core import DescendantElement, ModelParams, annulus_points, h2_element, power_sum
from descff.errors import DomainError
from descff.fock_oracle import (
    FockVector,
    HeisenbergSpec,
    VertexWord,
    even_projector_apply,
    invariant_lowering,
    level2_worked_example,
    level_basis,
    level_state_coefficients,
    matrix_element_tilde,
    pair_contraction,
    pi_L_vector,
    pi_R_vector,
    reduction_check,
    reduction_defect,
    tilde_to_plain,
    ts_expectation,
    ts_expectation_factorized,
    t_vacuum_expectation,
    two_boson_dimension,
    w_residue,
)
from descff.jfunctions import j_value
from descff.special_functions import f_kernel

from conftest import points, rel, seeds

ONE = DescendantElement.one()


def _gap(g, h):
    return max((abs(complex(c)) for _, c in (g - h).items()), default=0.0)


def test_pair_contractions(params):
    x, xp = 0.8 + 0.3j, -1.1 + 0.6j
    assert pair_contraction(VertexWord((("+", xp), ("-", x))), params) == pytest.approx(f_kernel(x / xp, params))
    assert pair_contraction(VertexWord((("+", xp), ("+", x))), params) == 1


def test_t_vacuum_small(params):
    assert t_vacuum_expectation([], 0.2, params) == 1
    assert t_vacuum_expectation([1.3j], 0.2, params) == pytest.approx(2 * math.cos(0.2 * math.pi))


@pytest.mark.parametrize("N,tol", [(2, 1e-12), (4, 1e-11), (6, 1e-10)])
def test_oracle_equivalence(params, N, tol):
    X = points(N, N, params)
    assert rel(t_vacuum_expectation(X, 0.23, params), j_value(ONE, 0.23, X, params)) < tol


def test_tilde_empty_insertions(params):
    X = points(3, 3, params)
    assert rel(matrix_element_tilde(ONE, ONE, X, 0.1, params), t_vacuum_expectation(X, 0.1, params)) < 1e-14


def test_tilde_odd_pair_is_plain(params):
    c1 = DescendantElement.c(1)
    X = points(4, 3, params)
    assert _gap(tilde_to_plain(c1 * c1.bar(), params), c1 * c1.bar()) == 0
    lhs = matrix_element_tilde(c1, c1, X, 0.1, params)
    assert rel(lhs, j_value(c1 * c1.bar(), 0.1, X, params)) < 1e-12


def test_tilde_to_plain_even_pair(params):
    heis = HeisenbergSpec(params)
    g = tilde_to_plain(DescendantElement.monomial((2,), (2,)), params)
    expected = DescendantElement.monomial((2,), (2,)) + ONE * (-4 / heis.Aplus(2))
    assert _gap(g, expected) < 1e-14


@pytest.mark.parametrize("h,hp", [
    (DescendantElement.c(2), DescendantElement.c(2)),
    (DescendantElement.monomial((1, 1)), DescendantElement.c(2)),
    (DescendantElement.monomial((2, 1)), DescendantElement.monomial((3,))),
])
def test_tilde_matches_wick_reduction(params, h, hp):
    X = points(5, 3, params)
    lhs = matrix_element_tilde(h, hp, X, 0.17, params)
    rhs = j_value(tilde_to_plain(h * hp.bar(), params), 0.17, X, params)
    assert rel(lhs, rhs) < 1e-11


def test_tilde_to_plain_linear(params):
    g1 = DescendantElement.monomial((2,), (2,))
    g2 = DescendantElement.monomial((2, 1), (1, 2))
    both = tilde_to_plain(g1 * 0.3 + g2 * (1 - 2j), params)
    sep = tilde_to_plain(g1, params) * 0.3 + tilde_to_plain(g2, params) * (1 - 2j)
    assert _gap(both, sep) < 1e-13


def test_tilde_N0_closed_form():
    P = ModelParams(p=0.31)
    for a in (0.05, 0.13, 0.21):
        val = matrix_element_tilde(h2_element(a, P), h2_element(-a, P), [], a, P)
        s = math.sin(math.pi * P.p) ** 2
        assert rel(val, 1 / (s * (s - math.sin(2 * math.pi * a) ** 2))) < 1e-12


def test_ts_expectation(params):
    X = points(6, 2, params)
    Y = [0.7 - 0.9j]
    assert rel(ts_expectation(X, [], 0.2, params), t_vacuum_expectation(X, 0.2, params)) < 1e-15
    assert rel(ts_expectation(X, Y, 0.2, params), ts_expectation(X, Y, -0.2, params)) < 1e-12
    assert rel(ts_expectation(X, Y, 0.2, params), ts_expectation_factorized(X, Y, 0.2, params)) < 1e-12
    Y2 = [0.7 - 0.9j, 1.2 + 0.4j]
    assert rel(ts_expectation([], Y2, 0.1, params), ts_expectation([], Y2, 0.37, params)) < 1e-14


@given(seeds, st.floats(-0.45, 0.45))
@settings(max_examples=10)
def test_ts_reflection_invariance(seed, a):
    P = ModelParams(p=0.31)
    pts = annulus_points(np.random.default_rng(seed), 4, P)
    X, Y = pts[:3], pts[3:]
    assert rel(ts_expectation(X, Y, a, P), ts_expectation(X, Y, -a, P)) < 1e-11


def test_level_state_zero(params):
    Xi = [0.9 + 0.2j, 1.3 - 0.4j]
    v0 = level_state_coefficients(Xi, [], 0.13, 0, params, starred=True)[0]
    assert v0.coefficient(()) == pytest.approx((2 * math.cos(0.13 * math.pi)) ** 2)


def test_level_state_d2_coefficient(params):
    x1, x2 = 0.9 + 0.2j, 1.3 - 0.4j
    a = 0.13
    v2 = level_state_coefficients([x1, x2], [], a, 2, params, starred=True)[2]
    rho2 = cmath.exp(2j * math.pi * a)
    w = params.omega
    expected = 0.5 * ((rho2 + 1) * (x1 + x2) ** 2 - (w - 1 / w + 2 * rho2 + 2) * x1 * x2)
    assert rel(v2.coefficient([(-1, 2)]), expected) < 1e-14


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("starred", [True, False])
def test_level_state_action(params, m, starred):
    heis = HeisenbergSpec(params)
    Xi, Eta = [0.9 + 0.2j, 1.3 - 0.4j], [1.1 - 0.3j]
    L = level_state_coefficients(Xi, Eta, 0.13, 4, params, starred=starred)
    factor = power_sum(m, Xi) + (1 + (-1) ** m) * power_sum(m, Eta)
    for n in range(m, 5):
        w = L[n].apply_linear(invariant_lowering(m, params, "bra"), heis) * (1 / heis.Aplus(m))
        assert (w - L[n - m] * factor).norm() <= 1e-12 * max(1, L[n - m].norm() * abs(factor))


def test_reduction_check_examples(params):
    assert reduction_check(pi_R_vector(DescendantElement.c(2), params), params)
    assert not reduction_check(FockVector({((1, 1),): 1.0}), params)
    assert reduction_check(pi_L_vector(DescendantElement.monomial((2, 1)), params), params)
    assert not reduction_check(FockVector({((1, 1),): 1.0}, "ket"), params)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_pi_R_image_rank(params, n):
    from descff.algebra_core import enumerate_partitions, partition_count

    basis = level_basis(n)
    assert len(basis) == two_boson_dimension(n)
    vecs = [pi_R_vector(DescendantElement.monomial(lam.parts), params).to_array(basis)
            for lam in enumerate_partitions(n)]
    assert np.linalg.matrix_rank(np.array(vecs), tol=1e-10) == partition_count(n)
    for v in vecs:
        assert reduction_defect(FockVector(dict(zip(basis, v))), params) < 1e-12


def _random_vector(rng, level, side="bra"):
    basis = [b for n in range(level + 1) for b in level_basis(n)]
    return FockVector({b: complex(*rng.normal(size=2)) for b in basis}, side)


@pytest.mark.parametrize("side", ["bra", "ket"])
def test_even_projectors(params, side):
    rng = np.random.default_rng(11)
    v = _random_vector(rng, 4, side)
    p2v = even_projector_apply(v, 1, params)
    assert (even_projector_apply(p2v, 1, params) - p2v).norm() < 1e-11 * max(1, p2v.norm())
    p24 = even_projector_apply(even_projector_apply(v, 2, params), 1, params)
    p42 = even_projector_apply(p2v, 2, params)
    assert (p24 - p42).norm() < 1e-11 * max(1, p24.norm())


def test_even_projector_annihilates(params):
    heis = HeisenbergSpec(params)
    ket = FockVector.vacuum("ket").apply_linear([(-1, -2, 1.0), (1, -2, 1.0)], heis)
    assert even_projector_apply(ket, 1, params).norm() < 1e-13
    with pytest.raises(DomainError):
        even_projector_apply(ket, 0, params)


@pytest.mark.parametrize("N", [0, 1, 2])
def test_w_residue(N):
    P = ModelParams(p=0.31)
    X = points(20 + N, N, P)
    out = w_residue(N, X, P, radius=1e-3, points=32)
    assert abs(out["value"] - out["half_radius"]) <= 1e-5 * max(1, abs(out["value"]))
    assert abs(out["value"] - out["target"]) <= 1e-5 * max(1, abs(out["target"]))


@pytest.mark.parametrize("a", [0.07, 0.13, 0.19, -0.11])
def test_level2_worked_example(a):
    P = ModelParams(p=0.31)
    out = level2_worked_example(a, P)
    assert out["reduction_defect"] < 1e-9
    assert out["pi_R_fit_residual"] < 1e-9
    mirror = level2_worked_example(-a, P)
    assert rel(out["h2_coefficient"], mirror["h2_coefficient"]) < 1e-9
    assert rel(out["h11_coefficient"], mirror["h11_coefficient"]) < 1e-9
    ratio = out["h2_coefficient"] / out["h11_coefficient"]
    target = -1j * (math.sin(math.pi * P.p) ** 2 - math.sin(2 * math.pi * a) ** 2)
    assert rel(ratio, target) < 1e-9
