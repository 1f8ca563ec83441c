"""Polynomial layer of the kink sector.

The generators are rescaled, C_{-m} = c_{-m}/K_m with
K_n = 2 i^{1-n} sin(pi p n / 2), and the currents

    A(z) = exp(sum_m C_{-m} z^m),
    D(z) = exp(2 sum_m (-1)^{m-1} C_{-2m} z^{2m})

give Q^h(X|Z) = (A(x_1)...A(x_N) D(z_1)...D(z_M), h). Two routes are
provided: the closed product form (:func:`q_eval`) and the pairing of
truncated exponential series (:func:`q_eval_pairing`).
"""

from __future__ import annotations

import cmath
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra_core import (
    EMPTY,
    DescendantElement,
    ModelParams,
    Partition,
    annulus_points,
    enumerate_partitions,
    eval_p,
    power_sum,
)
from .errors import DomainError
from .identities import IdentityReport, _report

__all__ = [
    "kink_constant",
    "KinkElement",
    "q_eval",
    "q_eval_pairing",
    "chain_defect",
    "current_product_defect",
    "pq_arguments",
    "pq_consistency",
    "q_level_rank",
]


def kink_constant(n: int, params: ModelParams) -> complex:
    """K_n = 2 i^{1-n} sin(pi p n / 2)."""
    if n < 1:
        raise DomainError("n must be positive")
    return 2 * 1j ** ((1 - n) % 4) * cmath.sin(math.pi * params.p * n / 2)


def _K_partition(lam: Partition, params: ModelParams) -> complex:
    out = 1
    for m in lam.parts:
        out *= kink_constant(m, params)
    return out


@dataclass(frozen=True)
class KinkElement:
    """An element of A (+ Abar) kept in the c-basis, with C-basis helpers."""

    element: DescendantElement

    @classmethod
    def C_monomial(cls, parts: Sequence[int], params: ModelParams,
                   antichiral: Sequence[int] = ()) -> "KinkElement":
        lam, mu = Partition(parts), Partition(antichiral)
        k = _K_partition(lam, params) * _K_partition(mu, params)
        return cls(DescendantElement({(lam, mu): 1 / k}))

    def K_h(self, params: ModelParams) -> dict:
        """K_h for each monomial of the element."""
        return {key: _K_partition(key[0], params) * _K_partition(key[1], params)
                for key in self.element.monomials()}

    def to_json(self) -> list[dict]:
        return self.element.to_json()

    @classmethod
    def from_json(cls, obj) -> "KinkElement":
        return cls(DescendantElement.from_json(obj))


def _as_element(h) -> DescendantElement:
    return h.element if isinstance(h, KinkElement) else h


def _current_exponent(m: int, X: Sequence, Z: Sequence, sign: int) -> complex:
    """Coefficient of c_{-m} (sign=+1) or cbar_{-m} (sign=-1) in the log of the currents, times K_m."""
    val = power_sum(sign * m, X)
    if m % 2 == 0:
        r = m // 2
        val += 2 * (-1) ** (r - 1) * power_sum(sign * m, Z)
    return val


def q_eval(h, X: Sequence, Z: Sequence, params: ModelParams) -> complex:
    """Q^h(X|Z) by the closed product form.

    Chiral parts use S_m, antichiral parts the mirrored currents with
    S_{-m}; coefficients are complex (a-independent).
    """
    g = _as_element(h)
    if g.mode != "complex":
        raise DomainError("q_eval takes complex coefficients")
    cache: dict = {}
    total = 0
    for (chi, anti), c in g.items():
        term = complex(c)
        for parts, sign in ((chi.parts, 1), (anti.parts, -1)):
            for m in parts:
                key = (m, sign)
                if key not in cache:
                    cache[key] = _current_exponent(m, X, Z, sign) / kink_constant(m, params)
                term *= cache[key]
        total += term
    return total


def _series_exp(coeffs: dict, level: int) -> dict:
    """exp(sum_m u_m c_{-m}) truncated at the given level, keyed by Partition."""
    out: dict = {EMPTY: 1.0}
    for m, u in coeffs.items():
        if m > level or u == 0:
            continue
        new: dict = defaultdict(complex)
        for lam, c in out.items():
            power, term, k = lam.level, c, 0
            while power <= level:
                parts = tuple(sorted(lam.parts + (m,) * k, reverse=True))
                new[Partition(parts)] += term
                k += 1
                term = term * u / k
                power += m
        out = dict(new)
    return out


def _series_mul(f: dict, g: dict, level: int) -> dict:
    out: dict = defaultdict(complex)
    for l1, c1 in f.items():
        for l2, c2 in g.items():
            if l1.level + l2.level <= level:
                out[l1 * l2] += c1 * c2
    return dict(out)


def q_eval_pairing(h, X: Sequence, Z: Sequence, params: ModelParams) -> complex:
    """Q^h(X|Z) from the inner product with k_m! normalisation.

    Each current is expanded as its own truncated exponential series and
    the series are multiplied; chiral elements only.
    """
    g = _as_element(h)
    if not g.is_chiral():
        raise DomainError("pairing route is implemented for chiral elements")
    level = max((chi.level for chi, _ in g.monomials()), default=0)
    K = {m: kink_constant(m, params) for m in range(1, level + 1)}
    series = {EMPTY: 1.0}
    for x in X:
        series = _series_mul(series, _series_exp({m: x**m / K[m] for m in K}, level), level)
    for z in Z:
        d = {2 * r: 2 * (-1) ** (r - 1) * z ** (2 * r) / K[2 * r] for r in range(1, level // 2 + 1)}
        series = _series_mul(series, _series_exp(d, level), level)
    total = 0
    for (chi, _), c in g.items():
        norm = 1
        for k in chi.multiplicities().values():
            norm *= math.factorial(k)
        total += complex(c) * series.get(chi, 0) * norm
    return total


def chain_defect(h, X: Sequence, x, Z: Sequence, params: ModelParams) -> float:
    """|Q(X, x, -x | Z, i x) - Q(X|Z)| relative to the larger side."""
    lhs = q_eval(h, list(X) + [x, -x], list(Z) + [1j * x], params)
    rhs = q_eval(h, X, Z, params)
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)


def current_product_defect(x, params: ModelParams, level: int = 6) -> float:
    """A(x)A(-x)D(ix) = 1 tested on every monomial up to the given level."""
    worst = 0.0
    for n in range(1, level + 1):
        for lam in enumerate_partitions(n):
            h = DescendantElement.monomial(lam.parts)
            worst = max(worst, abs(q_eval(h, [x, -x], [1j * x], params)))
    return worst


def pq_arguments(Xm: Sequence, Xp: Sequence, params: ModelParams) -> tuple[list, list]:
    """(X', Z') with P(X_-|X_+) = Q_{2N,N}(X'|Z')."""
    s = cmath.exp(0.5j * math.pi * params.p)  # omega^{1/2}
    X = list(Xm) + list(Xp)
    Xq = [-1j * s * x for x in X] + [1j / s * x for x in X]
    Zq = [x / s for x in Xm] + [s * x for x in Xp]
    return Xq, Zq


def pq_consistency(h, Xm: Sequence, Xp: Sequence, params: ModelParams,
                   tol: float = 1e-12) -> IdentityReport:
    """Breather P^h(X_-|X_+) against the kink Q^h at the shifted arguments."""
    g = _as_element(h)
    left = eval_p(g, Xm, Xp)
    Xq, Zq = pq_arguments(Xm, Xp, params)
    right = q_eval(g, Xq, Zq, params)
    X = list(Xm) + list(Xp)
    return _report("pq_consistency", params, float("nan"), X, left, right, tol,
                   n_minus=len(Xm), n_plus=len(Xp))


def q_level_rank(n: int, params: ModelParams, num_x: int | None = None, num_z: int | None = None,
                 seed: int = 0, tol: float = 1e-9) -> int:
    """Numerical rank of {Q^h : h a level-n chiral monomial} over random (X, Z)."""
    if n < 0:
        raise DomainError("level must be nonnegative")
    basis = [DescendantElement.monomial(lam.parts) for lam in enumerate_partitions(n)]
    num_x = num_x or max(2 * n, 1)
    num_z = num_z or max(n, 1)
    rng = np.random.default_rng(seed)
    rows = max(2 * len(basis), len(basis) + 5)
    M = np.empty((rows, len(basis)), dtype=complex)
    for r in range(rows):
        pts = annulus_points(rng, num_x + num_z, params)
        X, Z = pts[:num_x], pts[num_x:]
        M[r] = [q_eval(h, X, Z, params) for h in basis]
        M[r] /= max(np.max(np.abs(M[r])), 1e-300)
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > tol * s[0])) if s[0] > 0 else 0
