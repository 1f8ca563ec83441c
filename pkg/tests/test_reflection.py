import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from descff.algebra_core import DescendantElement, ModelParams, annulus_points, h2_element
from descff.errors import DegenerateParameterError, DomainError
from descff.jfunctions import j_rho, j_value
from descff.reflection import (
    apply_reflection,
    self_dual_level2,
    solve_reflection,
    verify_cluster,
    verify_periodicity,
)

from conftest import points, rel, seeds


def _gap(g, h):
    return max((abs(complex(c)) for _, c in (g - h).items()), default=0.0)


@pytest.mark.parametrize("N", range(0, 9))
def test_exponential_palindromy(params, N):
    X = points(30 + N, N, params)
    assert j_rho(DescendantElement.one(), X, params).palindromy_defect() < 1e-10


@pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
def test_solve_levels(params, n):
    sol = solve_reflection(n, 0.13, params)
    assert sol.residual < 1e-8
    assert sol.holdout_residual < 1e-8
    assert sol.involution_defect < 1e-7
    assert sol.matrix.shape == (len(sol.basis), len(sol.basis))


def test_level0_is_trivial(params):
    sol = solve_reflection(0, 0.21, params)
    assert abs(sol.matrix[0, 0] - 1) < 1e-12


def test_level2_known_matrix(params):
    sol = solve_reflection(2, 0.13, params)
    # basis order (2), (1,1): c-2 picks up c-1^2, c-1^2 is invariant
    labels = [lam.label() for lam in sol.basis]
    i2, i11 = labels.index("c-2"), labels.index("c-1^2")
    M = sol.matrix
    assert abs(M[i11, i11] - 1) < 1e-10 and abs(M[i11, i2]) < 1e-10
    s2a, sp = math.sin(2 * math.pi * 0.13), math.sin(math.pi * 0.31)
    assert rel(M[i2, i2], (sp - s2a) / (sp + s2a)) < 1e-9


def test_h2_self_dual(params):
    a = 0.13
    sol = solve_reflection(2, a, params)
    h11, h2 = self_dual_level2(a, params)
    assert _gap(apply_reflection(sol, h2), h2_element(-a, params)) < 1e-8
    assert _gap(apply_reflection(sol, h11), h11) < 1e-8


def test_reflection_reproduces_J(params):
    a = 0.17
    sol = solve_reflection(3, a, params, seed=4)
    h = DescendantElement.monomial((2, 1)) + DescendantElement.c(3) * (0.5 - 1j)
    hr = apply_reflection(sol, h)
    X = points(40, 5, params)
    assert rel(j_value(h, a, X, params), j_value(hr, -a, X, params)) < 1e-8


@pytest.mark.parametrize("bad", [0.155, -0.155, 0.655, 1.155])
def test_degenerate_parameters(params, bad):
    with pytest.raises(DegenerateParameterError, match="lattice"):
        solve_reflection(2, bad, params)


def test_condition_grows_near_lattice(params):
    far = solve_reflection(2, 0.05, params).condition
    near = solve_reflection(2, 0.155 - 1e-3, params).condition
    assert near > 10 * far


def test_self_dual_degenerate(params):
    with pytest.raises(DegenerateParameterError):
        self_dual_level2(0.155, params)


def test_apply_reflection_rejects(params):
    sol = solve_reflection(2, 0.13, params)
    with pytest.raises(DomainError):
        apply_reflection(sol, DescendantElement.c(3))
    with pytest.raises(DomainError):
        apply_reflection(sol, DescendantElement.cbar(2))


def test_solution_json_roundtrip(params):
    sol = solve_reflection(2, 0.13, params, seed=3)
    doc = json.loads(json.dumps(sol.to_json()))
    assert {"level", "basis", "matrix", "residual", "condition", "samples"} <= set(doc)
    assert doc["samples"]["seed"] == 3
    again = solve_reflection(2, 0.13, params, seed=3).to_json()
    assert json.dumps(again, sort_keys=True) == json.dumps(doc, sort_keys=True)


@settings(max_examples=15)
@given(seeds, st.integers(0, 6), st.sampled_from([(), (1,), (2,), (1, 1), (3, 1)]),
       st.sampled_from([(), (1,), (2,)]))
def test_periodicity(seed, N, chi, anti):
    P = ModelParams(p=0.31)
    rng = np.random.default_rng(seed)
    X = annulus_points(rng, N, P)
    a = float(rng.uniform(-0.45, 0.45))
    assert verify_periodicity(DescendantElement.monomial(chi, anti), a, X, P, tol=1e-10)


@pytest.mark.parametrize("h,hp", [
    (DescendantElement.monomial((1, 1)), DescendantElement.c(2)),
    (DescendantElement.c(2), DescendantElement.monomial((1, 1))),
])
def test_cluster(params, h, hp):
    X, Xp = points(50, 3, params), points(51, 3, params)
    assert verify_cluster(h, hp, 0.13, X, Xp, params, Lambda=30.0) < 1e-8
    assert verify_cluster(h, hp, 0.13, X, Xp, params, Lambda=2.0) > 1e-6
