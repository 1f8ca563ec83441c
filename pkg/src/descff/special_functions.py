"""Exact constants and pair functions of the model.

The t-integrals all have the shape

    int_0^inf dt/t * sum_terms c * prod sh(alpha t) * prod ch(gamma t) * e^{kappa t}
                               / prod sh(beta t)

and are evaluated in three pieces:

* [0, t_s]: termwise integration of the small-t power series, with the
  t^-2 and t^-1 parts removed by the finite-part rule
  FP int_0^inf f = lim (int_eps^inf f - A/eps + B log eps);
* [t_s, T]: adaptive quadrature (mpmath);
* [T, inf): expansion into exponentials c_k e^{lambda_k t}/t, each term
  integrated exactly as c_k E1(-lambda_k T).

The last step gives the analytic continuation of the integral when some
lambda_k has a positive real part. All expansion coefficients c_k are
integers for the integrands below, so the branch of E1 on the negative
axis only shifts the exponent by a multiple of 2 pi i.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np
from scipy import integrate

from .algebra_core import ModelParams
from .errors import ConvergenceError, DomainError, PoleError

__all__ = [
    "QuadratureSpec",
    "f_kernel",
    "f_matrix",
    "minimal_r",
    "lambda_prime",
    "vev_g",
    "reflection_const",
    "kink_g",
    "kink_g_representations",
    "regularized_integral",
    "mapped_integral",
    "Term",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Settings for the t-integrals.

    ``abs_tol``/``rel_tol`` are the accepted error targets, ``max_degree``
    bounds the tanh-sinh refinement, ``truncation`` is the point T where the
    exponential tail expansion takes over, ``series_order`` the number of
    Taylor terms used on [0, t_s] and ``dps`` the working precision.
    """

    abs_tol: float = 1e-13
    rel_tol: float = 1e-11
    max_degree: int = 8
    truncation: float = 4.0
    series_order: int = 60
    tail_cutoff: float = 45.0
    dps: int = 30

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise DomainError("target errors must be positive")
        if self.truncation <= 0:
            raise DomainError("truncation point must be positive")


DEFAULT_QUAD = QuadratureSpec()


# ---------------------------------------------------------------------------
# kernel f


def f_kernel(x, params: ModelParams):
    """f(x) = (x + omega)(x - 1/omega)/(x^2 - 1)."""
    if x == 0 or x == 1 or x == -1:
        raise PoleError(f"f has a pole or singular point at x = {x}")
    w = params.omega
    return (x + w) * (x - 1 / w) / (x * x - 1)


def f_matrix(X: Sequence, omega, dtype=complex) -> np.ndarray:
    """F[i, j] = f(x_i/x_j); the diagonal is left at 1."""
    n = len(X)
    F = np.ones((n, n), dtype=dtype)
    for i in range(n):
        for j in range(n):
            if i != j:
                r = X[i] / X[j]
                F[i, j] = (r + omega) * (r - 1 / omega) / (r * r - 1)
    return F


# ---------------------------------------------------------------------------
# generic regularized integral


@dataclass(frozen=True)
class Term:
    """c * prod sh(alpha t) * prod ch(gamma t) * e^{kappa t} / (t prod sh(beta t))."""

    coef: complex
    sh: tuple = ()
    ch: tuple = ()
    dsh: tuple = ()
    kappa: complex = 0.0


def _mul(a, b, K):
    out = [mpmath.mpc(0)] * K
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j in range(K - i):
            out[i + j] += ai * b[j]
    return out


def _recip(a, K):
    out = [mpmath.mpc(0)] * K
    out[0] = 1 / a[0]
    for n in range(1, K):
        s = mpmath.mpc(0)
        for k in range(1, n + 1):
            s += a[k] * out[n - k]
        out[n] = -s / a[0]
    return out


def _term_series(term: Term, K: int):
    """(v, coefficients) with term = t^v * sum_j g_j t^j."""
    g = [mpmath.mpc(0)] * K
    g[0] = mpmath.mpc(term.coef)
    for al in term.sh:
        al = mpmath.mpc(al)
        s = [al ** (j + 1) / mpmath.factorial(j + 1) if j % 2 == 0 else 0 for j in range(K)]
        g = _mul(g, s, K)
    for ga in term.ch:
        ga = mpmath.mpc(ga)
        s = [ga**j / mpmath.factorial(j) if j % 2 == 0 else 0 for j in range(K)]
        g = _mul(g, s, K)
    if term.kappa != 0:
        ka = mpmath.mpc(term.kappa)
        g = _mul(g, [ka**j / mpmath.factorial(j) for j in range(K)], K)
    for be in term.dsh:
        be = mpmath.mpc(be)
        s = [be ** (j + 1) / mpmath.factorial(j + 1) if j % 2 == 0 else 0 for j in range(K)]
        g = _mul(g, _recip(s, K), K)
    return len(term.sh) - len(term.dsh) - 1, g


def _term_value(term: Term, t):
    v = mpmath.mpc(term.coef) * mpmath.exp(term.kappa * t) / t
    for al in term.sh:
        v *= mpmath.sinh(al * t)
    for ga in term.ch:
        v *= mpmath.cosh(ga * t)
    for be in term.dsh:
        v /= mpmath.sinh(be * t)
    return v


def _exp_expansion(term: Term, T: float, cutoff: float):
    """Exponential expansion {lambda: c} of t * term, valid for t >= T."""
    pieces = {mpmath.mpc(term.kappa): mpmath.mpc(term.coef)}

    def combine(current, factor):
        out: dict = {}
        for l1, c1 in current.items():
            for l2, c2 in factor:
                lam = l1 + l2
                out[lam] = out.get(lam, 0) + c1 * c2
        return out

    for al in term.sh:
        al = mpmath.mpc(al)
        pieces = combine(pieces, [(al, mpmath.mpf(0.5)), (-al, mpmath.mpf(-0.5))])
    for ga in term.ch:
        ga = mpmath.mpc(ga)
        pieces = combine(pieces, [(ga, mpmath.mpf(0.5)), (-ga, mpmath.mpf(0.5))])
    # the largest exponent bounds how many geometric terms are needed
    for be in term.dsh:
        be = mpmath.mpc(be)
        if be.real == 0:
            raise DomainError("purely imaginary sh argument in denominator")
        sign = 1 if be.real > 0 else -1
        b = sign * be
        top = max(float(l.real) for l in pieces)
        n_max = max(0, int(math.ceil((top * T + cutoff) / (2 * float(b.real) * T))) + 1)
        geo = [(-b * (2 * n + 1), mpmath.mpf(2 * sign)) for n in range(n_max + 1)]
        pieces = combine(pieces, geo)
        pieces = {l: c for l, c in pieces.items() if float(l.real) * T > -cutoff - 60}
    return {l: c for l, c in pieces.items() if float(l.real) * T > -cutoff and c != 0}


def regularized_integral(terms: Sequence[Term], quad: QuadratureSpec = DEFAULT_QUAD,
                         return_error: bool = False):
    """Finite part of int_0^inf sum(terms) dt, continued analytically.

    Returns the value (and an error estimate when requested).
    """
    with mpmath.workdps(quad.dps):
        K = quad.series_order
        betas = [abs(complex(b)) for t in terms for b in t.dsh]
        radius = math.pi / max(betas) if betas else math.inf
        T = mpmath.mpf(quad.truncation)
        t_s = mpmath.mpf(min(0.25 * radius, 0.5, float(T) / 4))

        # small-t series
        total_series = mpmath.mpc(0)
        A = mpmath.mpc(0)
        B = mpmath.mpc(0)
        series_err = mpmath.mpf(0)
        for term in terms:
            v, g = _term_series(term, K)
            for j, c in enumerate(g):
                pw = v + j
                if pw == -2:
                    A += c
                elif pw == -1:
                    B += c
                elif pw < -2:
                    if abs(c) > 0:
                        raise DomainError("integrand has a pole of order > 2 at t = 0")
                else:
                    total_series += c * t_s ** (pw + 1) / (pw + 1)
            series_err += abs(g[-1]) * t_s ** (v + K) + abs(g[-2]) * t_s ** (v + K - 1)

        # middle piece
        def integrand(t):
            return sum(_term_value(term, t) for term in terms)

        nodes = [t_s] + [mpmath.mpf(x) for x in np.linspace(float(t_s), float(T), 9)[1:]]
        middle, mid_err = mpmath.quad(integrand, nodes, error=True, maxdegree=quad.max_degree)

        # tail
        tail = mpmath.mpc(0)
        for term in terms:
            for lam, c in _exp_expansion(term, float(T), quad.tail_cutoff).items():
                if abs(lam) * T < mpmath.mpf(10) ** (-quad.dps // 2):
                    raise PoleError("integral diverges logarithmically (zero exponent in the tail)")
                tail += c * mpmath.e1(-lam * T)
        tail_err = mpmath.exp(-quad.tail_cutoff) * len(terms)

        value = total_series + middle + tail - A / t_s + B * mpmath.log(t_s)
        err = float(series_err + mid_err + tail_err)
        value = complex(value)
    if not np.isfinite(err) or err > quad.abs_tol + quad.rel_tol * abs(value):
        raise ConvergenceError(f"regularized integral error {err:.3g} above target", estimate=err)
    return (value, err) if return_error else value


def mapped_integral(func, quad: QuadratureSpec = DEFAULT_QUAD) -> tuple[complex, float]:
    """int_0^inf func(t) dt via t = s/(1-s) and scipy's adaptive rule.

    Only for absolutely convergent integrands; used as an independent
    cross-check of :func:`regularized_integral`.
    """

    def mapped(s, part):
        if s <= 0 or s >= 1:
            return 0.0
        t = s / (1 - s)
        v = complex(func(t)) / (1 - s) ** 2
        return v.real if part == 0 else v.imag

    re, e1 = integrate.quad(mapped, 0, 1, args=(0,), limit=400, epsabs=quad.abs_tol, epsrel=1e-12)
    im, e2 = integrate.quad(mapped, 0, 1, args=(1,), limit=400, epsabs=quad.abs_tol, epsrel=1e-12)
    return complex(re, im), e1 + e2


def _exp_with_error(value, err, return_error):
    out = cmath.exp(value)
    return (out, abs(out) * err) if return_error else out


# ---------------------------------------------------------------------------
# constants and pair functions


def _r_terms(theta, p) -> list[Term]:
    pi = math.pi
    return [Term(4.0, (pi / 2, pi * p / 2, pi * (p + 1) / 2), (pi - 1j * theta,), (pi, pi))]


def minimal_r(theta, params: ModelParams, quad: QuadratureSpec = DEFAULT_QUAD,
              return_error: bool = False):
    """Pair function R(theta) of the vertex operators.

    The integral converges for -(2-p) pi < Im theta < -p pi and is
    continued analytically elsewhere (including real theta).
    """
    I, err = regularized_integral(_r_terms(theta, params.p), quad, return_error=True)
    return _exp_with_error(I, err, return_error)


def _lambda_prime_exponent_gl(p, order: int = 64) -> float:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    b = math.pi * p
    t = 0.5 * b * (nodes + 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        vals = np.where(t == 0, 1.0, t / np.sin(t))
    return float(0.5 * b * np.dot(weights, vals)) / (2 * math.pi)


def lambda_prime(params: ModelParams, quad: QuadratureSpec = DEFAULT_QUAD,
                 return_error: bool = False, rule: str = "tanh-sinh"):
    """lambda' = (2 sin(pi p/2))^{-1/2} exp(-int_0^{pi p} t/sin t dt/2pi).

    ``rule`` picks tanh-sinh (mpmath) or Gauss-Legendre (numpy nodes).
    """
    p = params.p
    if not 0 < complex(p).real < 1:
        raise DomainError("lambda' needs 0 < Re p < 1")
    if rule == "tanh-sinh":
        with mpmath.workdps(quad.dps):
            integral, err = mpmath.quad(lambda t: t / mpmath.sin(t) if t != 0 else mpmath.mpf(1),
                                        [0, mpmath.pi * p], error=True)
            expo = complex(integral / (2 * mpmath.pi))
            err = float(err) / (2 * math.pi)
    elif rule == "gauss-legendre":
        expo = _lambda_prime_exponent_gl(complex(p).real)
        err = abs(expo - _lambda_prime_exponent_gl(complex(p).real, 48))
    else:
        raise DomainError(f"unknown quadrature rule {rule!r}")
    if err > quad.abs_tol + quad.rel_tol * abs(expo):
        raise ConvergenceError("lambda' quadrature did not converge", estimate=err)
    value = (2 * cmath.sin(math.pi * p / 2)) ** -0.5 * cmath.exp(-expo)
    return (value, abs(value) * err) if return_error else value


def _vev_terms(a, p) -> list[Term]:
    c = (a + 0.5)
    return [
        Term(1.0, (0.5, c, c), (), (1.0, p / 2, (p + 1) / 2)),
        Term(-(2 * a + 1) ** 2 / (2 * p * (p + 1)), (), (), (), -(p + 1)),
    ]


def vev_g(a, params: ModelParams, quad: QuadratureSpec = DEFAULT_QUAD,
          return_error: bool = False):
    """Vacuum expectation value G_a, including the m^{alpha^2} prefactor."""
    p = params.p
    alpha2 = params.alpha(a) ** 2
    I, err = regularized_integral(_vev_terms(a, p), quad, return_error=True)
    scale = params.m * math.gamma((1 + p) / 2) * math.gamma((2 - p) / 2) / (4 * math.sqrt(math.pi)) \
        if complex(p).imag == 0 else \
        params.m * complex(mpmath.gamma((1 + p) / 2) * mpmath.gamma((2 - p) / 2)) / (4 * math.sqrt(math.pi))
    value = scale**alpha2 * cmath.exp(I)
    return (value, abs(value) * err) if return_error else value


def _gamma(z):
    z = complex(z)
    if z.imag == 0 and z.real <= 0 and abs(z.real - round(z.real)) < 1e-12:
        raise PoleError(f"Gamma pole at {z.real:g}")
    return complex(mpmath.gamma(z))


def reflection_const(a, params: ModelParams):
    """R_a from the closed Gamma-function formula."""
    p = params.p
    expo = 4 * a / (p * (p + 1))
    base = params.m * ((p + 1) / p) ** (p + 1) * _gamma((p + 1) / 2) * _gamma((2 - p) / 2) \
        / (4 * math.sqrt(math.pi))
    num = _gamma(1 - 2 * a / p) * _gamma(1 + 2 * a / (p + 1))
    den = _gamma(1 + 2 * a / p) * _gamma(1 - 2 * a / (p + 1))
    return base**expo * num / den


def _kink_terms_first(theta, p) -> list[Term]:
    pi = math.pi
    return [Term(1.0, (pi / 2, pi * (p + 1) / 2), (pi - 1j * theta,), (pi, pi, pi * p / 2))]


def _kink_terms_second(theta, p) -> list[Term]:
    pi = math.pi
    return [Term(1.0, (pi / 2, pi * (p - 1) / 2), (pi - 1j * theta,), (pi, pi, pi * p / 2))]


def kink_g_representations(theta, params: ModelParams, quad: QuadratureSpec = DEFAULT_QUAD):
    """Both integral representations of the kink pair function G(theta)."""
    p = params.p
    first = cmath.exp(-regularized_integral(_kink_terms_first(theta, p), quad))
    second = 1j * math.exp(float(mpmath.euler)) / math.pi * cmath.sinh(theta / math.pi) \
        * cmath.exp(regularized_integral(_kink_terms_second(theta, p), quad))
    return first, second


def kink_g(theta, params: ModelParams, quad: QuadratureSpec = DEFAULT_QUAD,
           return_error: bool = False, representation: int = 2):
    """Kink pair function G(theta) with the finite-part prescription at t = 0."""
    p = params.p
    if representation == 1:
        I, err = regularized_integral(_kink_terms_first(theta, p), quad, return_error=True)
        return _exp_with_error(-I, err, return_error)
    if representation != 2:
        raise DomainError("representation must be 1 or 2")
    I, err = regularized_integral(_kink_terms_second(theta, p), quad, return_error=True)
    pref = 1j * math.exp(float(mpmath.euler)) / math.pi * cmath.sinh(theta / math.pi)
    value = pref * cmath.exp(I)
    return (value, abs(value) * err) if return_error else value
