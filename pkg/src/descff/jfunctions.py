"""J-functions: direct subset sums, residues, pole structure, recurrences.

J^g_{N,a}(X) = sum over splittings X = X_- + X_+ of
    rho^{#X_- - #X_+} P^g(X_-|X_+) prod_{x in X_-, y in X_+} f(x/y),
with rho = exp(i pi a).

The direct evaluator enumerates the 2^N splittings by doubling: elements
are placed one at a time, every array over the already placed elements is
split into "goes to X_+" and "goes to X_-" halves, and the f-products and
power sums of X_- are extended without any division. The sum is binned by
k = #X_-, which yields the full Laurent polynomial in rho in one pass.
"""

from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath
import numpy as np

from .algebra_core import (
    DescendantElement,
    ModelParams,
    RhoLaurent,
    h2_element,
)
from .errors import DomainError, FitError, PoleError
from .special_functions import DEFAULT_QUAD, QuadratureSpec, f_kernel, lambda_prime, minimal_r, vev_g

__all__ = [
    "JResult",
    "j_direct",
    "j_rho",
    "j_value",
    "residue_kinematic",
    "numerical_residue",
    "PoleDecomposition",
    "pole_decomposition",
    "recur_exponential",
    "recur_exponential_rho",
    "recur_level2",
    "recur_level2_rho",
    "assemble_form_factor",
    "h2_value",
]

SEGMENT_BITS = 14
EXTENDED_DPS = 50


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("DESCFF_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class JResult:
    """Value of J^g_{N,a}(X) with bookkeeping."""

    value: complex
    N: int
    a: complex | None
    element: str
    rho: RhoLaurent | None = None
    err_estimate: float = 0.0
    p: complex | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> dict:
        out = {"N": self.N, "element": self.element,
               "a": None if self.a is None else _cjson(self.a),
               "p": None if self.p is None else _cjson(self.p),
               "err_estimate": self.err_estimate}
        if self.value is not None:
            out["value"] = _cjson(self.value)
        if self.rho is not None:
            out["rho_poly"] = self.rho.to_json()
        return out


def _cjson(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


# ---------------------------------------------------------------------------
# direct kernel


def _check_points(X: Sequence, tol: float = 1e-12) -> None:
    for i, x in enumerate(X):
        if x == 0:
            raise DomainError("J-functions need nonzero arguments")
        for j in range(i):
            r = x / X[j]
            if abs(r - 1) < tol or abs(r + 1) < tol:
                raise PoleError(
                    f"x_{i}/x_{j} = {complex(r):.6g}: coincident or opposite arguments; "
                    "use residue_kinematic or a limit instead")


def _needed_degrees(g: DescendantElement) -> set[int]:
    out = set()
    for chi, anti in g.monomials():
        out.update(chi.parts)
        out.update(-n for n in anti.parts)
    return out


def _segment(X, fmat, pows, tot, fixed, free, g, N, backend):
    """Per-monomial arrays {mono: [c_0..c_N]} and abs sums for one segment."""
    fixed_minus = [i for i, side in fixed if side]
    fixed_plus = [i for i, side in fixed if not side]
    one = backend["one"]
    F0 = one
    for i in fixed_minus:
        for j in fixed_plus:
            F0 = F0 * fmat[i][j]
    F = backend["array"]([F0])
    Smin = {r: backend["array"]([sum((pows[r][i] for i in fixed_minus), backend["zero"])]) for r in pows}
    k = np.array([len(fixed_minus)], dtype=np.int64)
    Cm, Cp = {}, {}
    for e in free:
        vm, vp = one, one
        for j in fixed_plus:
            vm = vm * fmat[e][j]
        for i in fixed_minus:
            vp = vp * fmat[i][e]
        Cm[e] = backend["array"]([vm])
        Cp[e] = backend["array"]([vp])
    cat = np.concatenate
    for pos, e in enumerate(free):
        F = cat((F * Cp[e], F * Cm[e]))
        for r in Smin:
            Smin[r] = cat((Smin[r], Smin[r] + pows[r][e]))
        k = cat((k, k + 1))
        for e2 in free[pos + 1:]:
            Cm[e2] = cat((Cm[e2] * fmat[e2][e], Cm[e2]))
            Cp[e2] = cat((Cp[e2], Cp[e2] * fmat[e][e2]))
        del Cm[e], Cp[e]

    gens: dict = {}

    def gen(n, anti):
        key = (n, anti)
        if key not in gens:
            sign = -1 if n % 2 else 1
            if anti:
                sm = Smin[-n]
                gens[key] = (tot[-n] - sm) - sign * sm
            else:
                sm = Smin[n]
                gens[key] = sm - sign * (tot[n] - sm)
        return gens[key]

    out = {}
    abs_total = 0.0
    for chi, anti in g.monomials():
        vals = F
        for n in chi.parts:
            vals = vals * gen(n, False)
        for n in anti.parts:
            vals = vals * gen(n, True)
        out[(chi, anti)] = backend["bin"](vals, k, N)
        abs_total += backend["abs_sum"](vals)
    return out, abs_total


def _bin_complex(vals, k, N):
    re = np.bincount(k, weights=vals.real, minlength=N + 1)
    im = np.bincount(k, weights=vals.imag, minlength=N + 1)
    return [complex(r, i) for r, i in zip(re, im)]


def _bin_mp(vals, k, N):
    return [mpmath.fsum(vals[k == kk]) if np.any(k == kk) else mpmath.mpc(0) for kk in range(N + 1)]


_DOUBLE = {
    "one": 1.0 + 0j,
    "zero": 0j,
    "array": lambda seq: np.array(seq, dtype=complex),
    "bin": _bin_complex,
    "abs_sum": lambda v: float(np.sum(np.abs(v))),
}

_EXTENDED = {
    "one": mpmath.mpc(1),
    "zero": mpmath.mpc(0),
    "array": lambda seq: np.array(seq, dtype=object),
    "bin": _bin_mp,
    "abs_sum": lambda v: float(sum(abs(z) for z in v)),
}


def _tree_sum(items: list, add: Callable):
    while len(items) > 1:
        nxt = [add(items[i], items[i + 1]) for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def _kernel(g: DescendantElement, X: Sequence, params: ModelParams):
    """Per-monomial coefficient lists c_k (k = #X_-) and the abs-sum of terms."""
    N = len(X)
    _check_points(X)
    extended = params.precision == "extended"
    backend = _EXTENDED if extended else _DOUBLE
    if extended:
        ctx = mpmath.workdps(EXTENDED_DPS)
        ctx.__enter__()
    try:
        if extended:
            Xc = [mpmath.mpc(x) for x in X]
            omega = mpmath.exp(1j * mpmath.pi * mpmath.mpc(params.p))
        else:
            Xc = [complex(x) for x in X]
            omega = params.omega
        fmat = [[None] * N for _ in range(N)]
        for i in range(N):
            for j in range(N):
                if i != j:
                    r = Xc[i] / Xc[j]
                    fmat[i][j] = (r + omega) * (r - 1 / omega) / (r * r - 1)
        pows = {r: [x**r for x in Xc] for r in _needed_degrees(g)}
        tot = {r: sum(v, backend["zero"]) for r, v in pows.items()}

        s = max(0, N - SEGMENT_BITS)
        free = list(range(N - s))
        top = list(range(N - s, N))
        assignments = [[(idx, bool((m >> b) & 1)) for b, idx in enumerate(top)] for m in range(2 ** s)]

        def run(fixed):
            return _segment(Xc, fmat, pows, tot, fixed, free, g, N, backend)

        if len(assignments) > 1 and _threads() > 1:
            with ThreadPoolExecutor(max_workers=_threads()) as pool:
                parts = list(pool.map(run, assignments))
        else:
            parts = [run(fx) for fx in assignments]

        def add(p1, p2):
            d1, a1 = p1
            d2, a2 = p2
            return {m: [u + v for u, v in zip(d1[m], d2[m])] for m in d1}, a1 + a2

        coeffs, abs_total = _tree_sum(parts, add)
        if extended:
            coeffs = {m: [complex(c) for c in cs] for m, cs in coeffs.items()}
    finally:
        if extended:
            ctx.__exit__(None, None, None)
    return coeffs, abs_total


def _as_laurent(g: DescendantElement, coeffs: dict, N: int) -> RhoLaurent:
    total = RhoLaurent()
    for mono, coef in g.items():
        poly = RhoLaurent({2 * k - N: c for k, c in enumerate(coeffs[mono])})
        total = total + poly * coef
    return total


def _rel_eps(params: ModelParams) -> float:
    return 1e-48 if params.precision == "extended" else 2.2e-16


def _coef_scale(g: DescendantElement, a) -> float:
    scale = 0.0
    for _, c in g.items():
        if isinstance(c, RhoLaurent):
            scale = max(scale, abs(c.at_a(a)) if a is not None else c.max_abs())
        else:
            scale = max(scale, abs(c))
    return scale


def j_rho(g: DescendantElement, X: Sequence, params: ModelParams) -> RhoLaurent:
    """J^g_N(X) as a Laurent polynomial in rho (degrees -N..N, parity N)."""
    coeffs, _ = _kernel(g, X, params)
    return _as_laurent(g, coeffs, len(X))


def j_direct(g: DescendantElement, a, X: Sequence, params: ModelParams) -> JResult:
    """Direct subset-sum evaluation of J^g_{N,a}(X)."""
    coeffs, abs_total = _kernel(g, X, params)
    poly = _as_laurent(g, coeffs, len(X))
    rho = cmath.exp(1j * math.pi * a)
    value = poly(rho)
    rho_scale = max(abs(rho), 1 / abs(rho)) ** max(len(X), 1)
    err = _rel_eps(params) * (len(X) + 4) * abs_total * _coef_scale(g, a) * rho_scale
    return JResult(value=complex(value), N=len(X), a=a, element=str(g), rho=poly,
                   err_estimate=float(err), p=params.p)


def j_value(g: DescendantElement, a, X: Sequence, params: ModelParams) -> complex:
    """Shortcut returning only the complex value of :func:`j_direct`."""
    return j_direct(g, a, X, params).value


# ---------------------------------------------------------------------------
# kinematic residues


def _residue_prefactor(X: Sequence, x, params: ModelParams):
    left = 1
    right = 1
    for y in X:
        left *= f_kernel(x / y, params)
        right *= f_kernel(y / x, params)
    return -1j * cmath.sin(math.pi * params.p) * (left - right)


def residue_kinematic(g: DescendantElement, a, X: Sequence, x, params: ModelParams) -> complex:
    """R^g_{N,a}(X; x) with N = len(X) + 2.

    (x' + x) J^g_{N,a}(X, x, x') tends to x R^g_{N,a}(X; x) as x' -> -x.
    """
    return _residue_prefactor(X, x, params) * j_value(g, a, X, params)


def numerical_residue(g: DescendantElement, a, X: Sequence, x, params: ModelParams,
                      radius: float = 1e-3, points: int = 32) -> complex:
    """Contour estimate of x^{-1} Res_{x'=-x} J^g(X, x, x').

    Trapezoid rule on a circle of radius ``radius*|x|`` around x' = -x;
    exponentially accurate since the integrand is analytic on the circle.
    """
    total = 0
    for m in range(points):
        u = radius * abs(x) * cmath.exp(2j * math.pi * (m + 0.5) / points)
        total += j_value(g, a, list(X) + [x, -x + u], params) * u
    return total / points / x


# ---------------------------------------------------------------------------
# pole / asymptotic decomposition


@dataclass(frozen=True)
class PoleDecomposition:
    """J(X, x) = sum_i x_i R_i/(x + x_i) + sum_s C_s x^s."""

    residues: list
    C_inf: dict
    C_zero: dict
    D: complex
    fit_residual: float
    endpoint_defect: float | None


def pole_decomposition(g: DescendantElement, a, X: Sequence, params: ModelParams,
                       tol: float = 1e-8, seed: int = 0) -> PoleDecomposition:
    """Separate the kinematic poles of J^g_{N,a}(X, x) in x from its Laurent part.

    The Laurent part is fitted on a circle with degrees [-nbar-2, n+2]; the
    coefficients outside [-nbar, n] must vanish, which checks the degree bound.
    """
    if not g.is_homogeneous():
        raise DomainError("pole_decomposition needs a homogeneous element")
    n, nbar = g.level()
    X = list(X)
    residues = []
    for i, xi in enumerate(X):
        rest = X[:i] + X[i + 1:]
        residues.append(residue_kinematic(g, a, rest, xi, params))
    D = sum(residues)

    lo, hi = -nbar - 2, n + 2
    degs = list(range(lo, hi + 1))
    M = 2 * len(degs) + 6
    rng = np.random.default_rng(seed)
    mods = sorted(abs(complex(x)) for x in X)
    radius = math.exp(float(np.mean(np.log(mods)))) if mods else 1.0
    if any(abs(radius - m) < 0.05 * m for m in mods):
        radius *= 1.13
    phase = rng.uniform(0, 2 * math.pi / M)
    with mpmath.workdps(30):
        rows, rhs = [], []
        for m in range(M):
            z = radius * cmath.exp(1j * (phase + 2 * math.pi * m / M))
            val = j_value(g, a, X + [z], params)
            val -= sum(xi * R / (z + xi) for xi, R in zip(X, residues))
            rows.append([mpmath.mpc(z) ** d for d in degs])
            rhs.append(mpmath.mpc(val))
        A = mpmath.matrix(rows)
        b = mpmath.matrix(rhs)
        sol, res = mpmath.qr_solve(A, b)
        coeffs = {d: complex(sol[j]) for j, d in enumerate(degs)}
        scale = max(max(abs(c) * radius**d for d, c in coeffs.items()), 1e-300)
        fit_residual = float(res) / (scale * math.sqrt(M))
    outside = max(abs(coeffs[d]) * radius**d for d in degs if d < -nbar or d > n) / scale
    if fit_residual > tol or outside > tol:
        raise FitError(f"Laurent fit residual {max(fit_residual, outside):.3g} above {tol:g}",
                       residual=max(fit_residual, outside))
    C_inf = {d: coeffs[d] for d in range(-nbar, n + 1)}
    C_zero = dict(C_inf)
    C_zero[0] = C_zero.get(0, 0) + D

    endpoint_defect = None
    if g.mode == "complex":
        top = 0
        for (chi, anti), c in g.items():
            if chi.level != n:
                continue
            hbar = DescendantElement.monomial((), anti.parts)
            h = DescendantElement.monomial(chi.parts)
            top += c * j_value(hbar, a, X, params) * j_value(h, a, [1.0], params)
        endpoint_defect = abs(C_inf[n] - top) / max(abs(top), 1e-300) if n > 0 or top != 0 else 0.0
    return PoleDecomposition(residues=residues, C_inf=C_inf, C_zero=C_zero, D=D,
                             fit_residual=max(fit_residual, outside), endpoint_defect=endpoint_defect)


# ---------------------------------------------------------------------------
# recurrences


def _cos_factor(a):
    return 2 * cmath.cos(math.pi * a)


RHO_COS = RhoLaurent({1: 1.0, -1: 1.0})


def _recur_exp(X: Sequence, params: ModelParams, cos2):
    """Memoized exponential recurrence; values are numbers or RhoLaurent."""
    X = list(X)
    N = len(X)
    _check_points(X)
    sinp = cmath.sin(math.pi * params.p)
    fm = [[f_kernel(X[i] / X[j], params) if i != j else 1 for j in range(N)] for i in range(N)]
    memo: dict[int, object] = {0: 1 if not isinstance(cos2, RhoLaurent) else RhoLaurent.constant(1.0)}

    def J(mask: int):
        if mask in memo:
            return memo[mask]
        idx = [i for i in range(N) if mask >> i & 1]
        m = idx[-1]
        rest = idx[:-1]
        x = X[m]
        value = cos2 * J(mask & ~(1 << m))
        for i in rest:
            others = [j for j in rest if j != i]
            left = 1
            right = 1
            for j in others:
                left *= fm[i][j]
                right *= fm[j][i]
            R = -1j * sinp * (left - right)
            if R != 0:
                value = value + J(mask & ~(1 << m) & ~(1 << i)) * (R * X[i] / (x + X[i]))
        memo[mask] = value
        return value

    return J, memo


def recur_exponential(N: int, a, X: Sequence, params: ModelParams) -> complex:
    """J_{N,a}(X) from the recurrence in the last argument."""
    X = list(X)
    if len(X) != N:
        raise DomainError("len(X) must equal N")
    J, _ = _recur_exp(X, params, _cos_factor(a))
    return complex(J((1 << N) - 1))


def recur_exponential_rho(N: int, X: Sequence, params: ModelParams) -> RhoLaurent:
    """Same recurrence with cos(pi a) kept symbolic in rho."""
    X = list(X)
    if len(X) != N:
        raise DomainError("len(X) must equal N")
    J, _ = _recur_exp(X, params, RHO_COS)
    return J((1 << N) - 1)


def _recur_h2(X: Sequence, params: ModelParams, cos2, exp_over_cos2):
    X = list(X)
    N = len(X)
    sinp = cmath.sin(math.pi * params.p)
    fm = [[f_kernel(X[i] / X[j], params) if i != j else 1 for j in range(N)] for i in range(N)]
    zero = RhoLaurent() if isinstance(cos2, RhoLaurent) else 0
    memo: dict[int, object] = {}

    def J2(mask: int):
        if mask in memo:
            return memo[mask]
        idx = [i for i in range(N) if mask >> i & 1]
        if len(idx) <= 1:
            memo[mask] = zero
            return zero
        m = idx[-1]
        rest = idx[:-1]
        x = X[m]
        base = mask & ~(1 << m)
        s1 = sum(X[i] for i in rest)
        value = cos2 * J2(base) + exp_over_cos2(base) * (4j * x * s1)
        for i in rest:
            others = [j for j in rest if j != i]
            left = 1
            right = 1
            for j in others:
                left *= fm[i][j]
                right *= fm[j][i]
            R = -1j * sinp * (left - right)
            if R != 0:
                value = value - J2(base & ~(1 << i)) * (R * x / (x + X[i]))
        memo[mask] = value
        return value

    return J2


def recur_level2_rho(N: int, X: Sequence, params: ModelParams, tol: float = 1e-10) -> RhoLaurent:
    """J^{h2_a}_{N,a}(X) as a Laurent polynomial in rho.

    The term 2i J_{N-1,a}/cos(pi a) is written as 4i Q with
    Q = J_{N-1}/(rho + 1/rho) divided exactly.
    """
    X = list(X)
    if len(X) != N:
        raise DomainError("len(X) must equal N")
    Jexp, _ = _recur_exp(X, params, RHO_COS)
    cache: dict[int, RhoLaurent] = {}

    def quotient(mask):
        if mask not in cache:
            if mask == 0:
                # only reached with S1 = 0 (one remaining point would need N = 1)
                cache[mask] = RhoLaurent()
            else:
                q, r = Jexp(mask).divmod_cos()
                scale = max(Jexp(mask).max_abs(), 1e-300)
                if r.max_abs() > tol * scale:
                    raise DomainError("exponential J is not divisible by cos(pi a)")
                cache[mask] = q
        return cache[mask]

    J2 = _recur_h2(X, params, RHO_COS, quotient)
    return J2((1 << N) - 1)


def recur_level2(N: int, a, X: Sequence, params: ModelParams, cos_threshold: float = 1e-3) -> complex:
    """J^{h2_a}_{N,a}(X) from the level-2 recurrence.

    Near cos(pi a) = 0 the rho-polynomial form is used.
    """
    X = list(X)
    if len(X) != N:
        raise DomainError("len(X) must equal N")
    c = cmath.cos(math.pi * a)
    if abs(c) < cos_threshold:
        return complex(recur_level2_rho(N, X, params).at_a(a))
    cos2 = 2 * c
    Jexp, _ = _recur_exp(X, params, cos2)
    J2 = _recur_h2(X, params, cos2, lambda mask: Jexp(mask) / cos2)
    return complex(J2((1 << N) - 1))


# ---------------------------------------------------------------------------
# physical form factors


def assemble_form_factor(g: DescendantElement, a, thetas: Sequence, params: ModelParams,
                         quad: QuadratureSpec = DEFAULT_QUAD) -> complex:
    """G_a (i lambda')^N prod_{i<j} R(theta_i - theta_j) J^g_{N,a}(e^theta)."""
    thetas = list(thetas)
    N = len(thetas)
    value = vev_g(a, params, quad)
    if N:
        value *= (1j * lambda_prime(params, quad)) ** N
    for i in range(N):
        for j in range(i + 1, N):
            value *= minimal_r(thetas[i] - thetas[j], params, quad)
    X = [cmath.exp(t) for t in thetas]
    return value * j_value(g, a, X, params)


def h2_value(a, X: Sequence, params: ModelParams) -> complex:
    """J of h^(2)_a by direct summation (convenience for tests and CLI)."""
    return j_value(h2_element(a, params), a, X, params)
