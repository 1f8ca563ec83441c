"""Identities at a = -1/2: equation of motion, energy-momentum, T.

All limits a -> -1/2 are taken through rho-Laurent polynomials: a
combination carrying tan(pi a) is multiplied out, divided exactly by
rho + 1/rho and only then evaluated at rho = -i.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .algebra_core import DescendantElement, ModelParams, RhoLaurent, power_sum
from .errors import DomainError
from .jfunctions import j_rho, j_value, recur_level2

__all__ = [
    "IdentityReport",
    "d_da_j",
    "em_lhs",
    "check_eom",
    "check_em_conservation",
    "check_T_identification",
    "check_odd_generator",
]

A_HALF = -0.5
RHO_HALF = cmath.exp(-0.5j * math.pi)  # rho at a = -1/2
_ONE = DescendantElement.one()
_SIN = RhoLaurent({1: -0.5j, -1: 0.5j})  # sin(pi a)
_COS2 = RhoLaurent({1: 1.0, -1: 1.0})  # 2 cos(pi a)


@dataclass(frozen=True)
class IdentityReport:
    name: str
    p: complex
    a: complex
    N: int
    X: tuple
    left: complex
    right: complex
    deviation: float
    tol: float
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tol

    def to_json(self) -> dict:
        def cj(z):
            z = complex(z)
            return {"re": z.real, "im": z.imag}

        return {
            "name": self.name,
            "p": cj(self.p),
            "a": cj(self.a),
            "N": self.N,
            "X": [cj(x) for x in self.X],
            "left": cj(self.left),
            "right": cj(self.right),
            "deviation": self.deviation,
            "tol": self.tol,
            "pass": self.passed,
            "meta": self.meta,
        }


def _report(name, params, a, X, left, right, tol, **meta) -> IdentityReport:
    left, right = complex(left), complex(right)
    scale = max(abs(left), abs(right))
    # both sides vanish identically for some N; compare absolutely then
    dev = abs(left - right) / scale if scale > 1e-12 else abs(left - right)
    return IdentityReport(name=name, p=params.p, a=a, N=len(X), X=tuple(complex(x) for x in X),
                          left=left, right=right, deviation=float(dev), tol=tol, meta=meta)


def d_da_j(g: DescendantElement | Callable, X: Sequence, params: ModelParams, at_a=A_HALF,
           method: str = "exact", step: float = 1e-4) -> complex:
    """d/da J^g_{N,a}(X) at a = at_a.

    ``method="exact"`` differentiates the rho-polynomial termwise; it needs
    an a-independent g. ``method="fd"`` uses fourth-order central
    differences and also accepts a callable a -> element.
    """
    if method == "exact":
        if callable(g) and not isinstance(g, DescendantElement):
            raise DomainError("exact derivative needs an a-independent element")
        return complex(j_rho(g, X, params).d_da().at_a(at_a))
    if method != "fd":
        raise DomainError(f"unknown method {method!r}")

    def J(a):
        elem = g(a) if callable(g) and not isinstance(g, DescendantElement) else g
        return j_value(elem, a, X, params)

    h = step
    return (-J(at_a + 2 * h) + 8 * J(at_a + h) - 8 * J(at_a - h) + J(at_a - 2 * h)) / (12 * h)


def check_eom(N: int, X: Sequence, params: ModelParams, tol: float = 1e-8) -> IdentityReport:
    """S_1 S_{-1} J'_N = (pi / sin pi p) J_{N, p - 1/2} for odd N."""
    if N % 2 != 1 or len(X) != N:
        raise DomainError("check_eom takes odd N with len(X) == N")
    left = power_sum(1, X) * power_sum(-1, X) * d_da_j(_ONE, X, params)
    right = math.pi / params.sin_pi_p * j_value(_ONE, params.p - 0.5, X, params)
    return _report("eom", params, A_HALF, X, left, right, tol)


def em_lhs(X: Sequence, params: ModelParams) -> tuple[complex, float]:
    """lim_{a->-1/2} J^{h2_a cbar_{-1}}_{N,a}(X) and the division remainder.

    (cos pi a J^{c2 cb1} - i sin pi a J^{c11 cb1}) / cos pi a is formed in rho,
    divided exactly and evaluated; the denominator sin pi p - sin 2 pi a
    equals sin pi p there.
    """
    A = j_rho(DescendantElement.monomial((2,), (1,)), X, params)
    B = j_rho(DescendantElement.monomial((1, 1), (1,)), X, params)
    num = _COS2 * A - (_SIN * B) * 2j
    q, r = num.divmod_cos()
    scale = max(num.max_abs(), 1e-300)
    return complex(q(RHO_HALF)) / params.sin_pi_p, r.max_abs() / scale


def check_em_conservation(N: int, X: Sequence, params: ModelParams,
                          tol: float = 1e-8) -> IdentityReport:
    """lim J^{h2_a cb_{-1}} = i/(2 sin^2 pi p) (J^{c1}_{-1/2+p} + J^{c1}_{-1/2-p}), even N."""
    if N % 2 != 0 or len(X) != N:
        raise DomainError("check_em_conservation takes even N with len(X) == N")
    left, remainder = em_lhs(X, params)
    c1 = DescendantElement.c(1)
    p = params.p
    right = 1j / (2 * params.sin_pi_p**2) * (j_value(c1, -0.5 + p, X, params)
                                             + j_value(c1, -0.5 - p, X, params))
    return _report("em_conservation", params, A_HALF, X, left, right, tol, division_remainder=remainder)


def check_T_identification(N: int, X: Sequence, params: ModelParams,
                           tol: float = 1e-8) -> IdentityReport:
    """lim J^{h2_a} = (1/sin pi p)(J^{c2}_{-1/2} + (i/pi) S_1^2 J'_N)."""
    if len(X) != N:
        raise DomainError("len(X) must equal N")
    left = recur_level2(N, A_HALF, X, params)
    c2 = DescendantElement.c(2)
    right = (j_value(c2, A_HALF, X, params)
             + 1j / math.pi * power_sum(1, X) ** 2 * d_da_j(_ONE, X, params)) / params.sin_pi_p
    return _report("T_identification", params, A_HALF, X, left, right, tol)


def check_odd_generator(g: DescendantElement, n: int, X: Sequence, a, params: ModelParams,
                        antichiral: bool = False, tol: float = 1e-10) -> IdentityReport:
    """J^{c_{1-2n} g} = S_{2n-1} J^g, or the cbar version with S_{1-2n}."""
    if n < 1:
        raise DomainError("n must be positive")
    m = 2 * n - 1
    if antichiral:
        gen, r = DescendantElement.cbar(m), -m
    else:
        gen, r = DescendantElement.c(m), m
    left = j_value(gen * g, a, X, params)
    right = power_sum(r, X) * j_value(g, a, X, params)
    # integrals of motion: c_{1-2n} <-> I_{2n-1}, eigenvalue J_{2n-1} S_{2n-1}
    meta = {"generator": str(gen), "integral_of_motion": f"I_{r}"}
    return _report("odd_generator", params, a, X, left, right, tol, **meta)
