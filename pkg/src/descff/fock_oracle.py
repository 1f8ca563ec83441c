"""Free-field oracle: two Heisenberg families d^+_n, d^-_n.

    [d^s_m, d^s'_n] = m A^s_m delta_{m+n,0}   (s != s'),  zero for s = s'
    A^+_n = omega^n + (-1/omega)^n - 1 - (-1)^n,   A^-_n = (-1)^n A^+_n

Vertex operators lambda_{+-}(z) are normal-ordered exponentials, so every
vacuum expectation of a word is a product of pairwise contraction factors.
Linear insertions (pi_R, pi_L images) are moved through the word with their
c-number commutators.

A bra is stored as <1| prod d^s_n (n > 0), a ket as prod d^s_{-n} |1>
(n > 0); in both cases a monomial is a sorted tuple of (sign, n) pairs with
sign in {+1, -1} and n > 0.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from math import factorial
from typing import Iterable, Mapping, Sequence

import numpy as np

from .algebra_core import (
    DescendantElement,
    ModelParams,
    Partition,
    enumerate_partitions,
    h2_element,
    partition_count,
)
from .errors import DomainError, PoleError
from .special_functions import f_kernel

__all__ = [
    "HeisenbergSpec",
    "FockVector",
    "VertexWord",
    "pair_contraction",
    "t_vacuum_expectation",
    "matrix_element_tilde",
    "tilde_to_plain",
    "ts_expectation",
    "ts_expectation_factorized",
    "level_basis",
    "reduction_defect",
    "level_state_coefficients",
    "reduction_check",
    "even_projector_apply",
    "pi_R_vector",
    "pi_L_vector",
    "two_boson_dimension",
    "w_residue",
    "level2_worked_example",
]

PLUS, MINUS = +1, -1


class HeisenbergSpec:
    """Structure constants A^{+-}_m for a given coupling."""

    def __init__(self, params: ModelParams):
        self.params = params
        self.omega = params.omega

    def A(self, sign: int, m: int) -> complex:
        """A^sign_m for any nonzero m (A^s_{-m} = A^{-s}_m)."""
        if m == 0:
            raise DomainError("mode index must be nonzero")
        if m < 0:
            return self.A(-sign, -m)
        w = self.omega
        ap = w**m + (-1 / w) ** m - 1 - (-1) ** m
        return ap if sign == PLUS else (-1) ** m * ap

    def Aplus(self, m: int) -> complex:
        return self.A(PLUS, m)

    def commutator(self, s1: int, m: int, s2: int, n: int) -> complex:
        """[d^{s1}_m, d^{s2}_n]."""
        if s1 == s2 or m + n != 0:
            return 0
        return m * self.A(s1, m)


# ---------------------------------------------------------------------------
# Fock vectors


def _key(mono: Iterable[tuple[int, int]]) -> tuple:
    return tuple(sorted(mono, key=lambda t: (-t[0], t[1])))


def _mono_level(mono) -> int:
    return sum(n for _, n in mono)


class FockVector:
    """Finite combination of mode monomials on one side of the vacuum."""

    __slots__ = ("terms", "side")

    def __init__(self, terms: Mapping[tuple, complex] | None = None, side: str = "bra"):
        if side not in ("bra", "ket"):
            raise DomainError("side must be 'bra' or 'ket'")
        clean: dict[tuple, complex] = {}
        for mono, c in (terms or {}).items():
            k = _key(mono)
            clean[k] = clean.get(k, 0) + c
        self.terms = {k: c for k, c in clean.items() if c != 0}
        self.side = side

    @classmethod
    def vacuum(cls, side: str = "bra") -> "FockVector":
        return cls({(): 1.0}, side)

    def levels(self) -> set[int]:
        return {_mono_level(m) for m in self.terms}

    def level(self) -> int:
        lv = self.levels()
        if len(lv) > 1:
            raise DomainError("vector is not graded")
        return next(iter(lv), 0)

    def __add__(self, other: "FockVector") -> "FockVector":
        self._same_side(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return FockVector(out, self.side)

    def __sub__(self, other):
        return self + other * (-1)

    def __mul__(self, c) -> "FockVector":
        return FockVector({k: v * c for k, v in self.terms.items()}, self.side)

    __rmul__ = __mul__

    def _same_side(self, other):
        if self.side != other.side:
            raise DomainError("cannot combine bra and ket vectors")

    def norm(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def coefficient(self, mono: Iterable[tuple[int, int]]) -> complex:
        return self.terms.get(_key(mono), 0)

    def to_array(self, basis: Sequence[tuple]) -> np.ndarray:
        return np.array([self.terms.get(_key(b), 0) for b in basis], dtype=complex)

    def apply_mode(self, sign: int, m: int, heis: HeisenbergSpec) -> "FockVector":
        """Act with d^sign_m: from the right on a bra, from the left on a ket."""
        raising = (m > 0) if self.side == "bra" else (m < 0)
        n = abs(m)
        out: dict[tuple, complex] = {}
        for mono, c in self.terms.items():
            if raising:
                k = _key(mono + ((sign, n),))
                out[k] = out.get(k, 0) + c
                continue
            # lowering: c-number commutator with each matching factor
            for idx, (s2, n2) in enumerate(mono):
                if n2 != n or s2 == sign:
                    continue
                if self.side == "bra":
                    # <1| ... d^{s2}_n ... d^sign_{-n}: [d^{s2}_n, d^sign_{-n}]
                    factor = heis.commutator(s2, n, sign, -n)
                else:
                    # d^sign_n ... d^{s2}_{-n} ... |1>: [d^sign_n, d^{s2}_{-n}]
                    factor = heis.commutator(sign, n, s2, -n)
                k = _key(mono[:idx] + mono[idx + 1:])
                out[k] = out.get(k, 0) + c * factor
        return FockVector(out, self.side)

    def apply_linear(self, combo: Sequence[tuple[int, int, complex]], heis: HeisenbergSpec) -> "FockVector":
        """Act with sum coef * d^sign_m given as (sign, m, coef) triples."""
        total = FockVector({}, self.side)
        for sign, m, coef in combo:
            total = total + self.apply_mode(sign, m, heis) * coef
        return total

    def __repr__(self) -> str:
        body = " + ".join(f"({c:.6g})" + "".join(f"d{'+' if s > 0 else '-'}{n}" for s, n in m)
                          for m, c in self.terms.items())
        return f"FockVector[{self.side}]({body or '0'})"


def level_basis(n: int) -> list[tuple]:
    """All monomials of total level n in two boson families."""
    out = []
    for j in range(n + 1):
        for lam in enumerate_partitions(j):
            for mu in enumerate_partitions(n - j):
                out.append(_key([(MINUS, k) for k in lam.parts] + [(PLUS, k) for k in mu.parts]))
    return out


def two_boson_dimension(n: int) -> int:
    return sum(partition_count(j) * partition_count(n - j) for j in range(n + 1))


def _generator_modes(n: int, heis: HeisenbergSpec, side: str):
    A = heis.Aplus(n)
    m = n if side == "bra" else -n
    return [(MINUS, m, 1 / A), (PLUS, m, -1 / A)]


def pi_R_vector(h: DescendantElement, params: ModelParams) -> FockVector:
    """<1| pi_R(h) for a chiral element h."""
    return _pi_vector(h, params, "bra")


def pi_L_vector(h: DescendantElement, params: ModelParams) -> FockVector:
    """pi_L(h) |1> for a chiral element h."""
    return _pi_vector(h, params, "ket")


def _pi_vector(h, params, side):
    if not h.is_chiral():
        raise DomainError("pi_R / pi_L take chiral elements")
    heis = HeisenbergSpec(params)
    total = FockVector({}, side)
    for (chi, _), c in h.items():
        v = FockVector.vacuum(side)
        for n in chi.parts:
            v = v.apply_linear(_generator_modes(n, heis, side), heis)
        total = total + v * complex(c)
    return total


# ---------------------------------------------------------------------------
# vertex words and contractions


@dataclass(frozen=True)
class VertexWord:
    """Ordered letters ('+', z), ('-', z) or ('s', y), left to right."""

    letters: tuple

    def __post_init__(self):
        for kind, _ in self.letters:
            if kind not in ("+", "-", "s"):
                raise DomainError(f"unknown letter kind {kind!r}")

    def expanded(self) -> list[tuple[int, complex]]:
        """Flatten s(y) = :lambda_-(y) lambda_+(-y): into signed letters."""
        out = []
        for idx, (kind, z) in enumerate(self.letters):
            if kind == "s":
                out.append((MINUS, z, idx))
                out.append((PLUS, -z, idx))
            else:
                out.append((PLUS if kind == "+" else MINUS, z, idx))
        return out


def _contract(e1: int, z1, e2: int, z2, params: ModelParams):
    """Vacuum contraction of lambda_{e1}(z1) standing left of lambda_{e2}(z2)."""
    if e1 == e2:
        return 1
    if e1 == PLUS:
        return f_kernel(z2 / z1, params)
    return f_kernel(z1 / z2, params)


def pair_contraction(word: VertexWord, params: ModelParams):
    """<1| word |1>: product of contraction factors of all letter pairs."""
    flat = word.expanded()
    value = 1
    for i in range(len(flat)):
        e1, z1, o1 = flat[i]
        for j in range(i + 1, len(flat)):
            e2, z2, o2 = flat[j]
            if o1 == o2:
                continue  # inside one s(y): already normal ordered
            try:
                value *= _contract(e1, z1, e2, z2, params)
            except PoleError as exc:
                raise PoleError(f"inadmissible arguments {z1} and {z2}") from exc
    return value


def _sign_words(X: Sequence, a):
    rho = cmath.exp(1j * math.pi * a)
    for signs in itertools.product((MINUS, PLUS), repeat=len(X)):
        weight = rho ** (signs.count(MINUS) - signs.count(PLUS))
        yield signs, weight


def t_vacuum_expectation(X: Sequence, a, params: ModelParams) -> complex:
    """<t(x_1) ... t(x_N)>_a with t = rho lambda_- + rho^{-1} lambda_+."""
    total = 0
    for signs, weight in _sign_words(X, a):
        word = VertexWord(tuple(("+" if s > 0 else "-", x) for s, x in zip(signs, X)))
        total += weight * pair_contraction(word, params)
    return complex(total)


def ts_expectation(X: Sequence, Y: Sequence, a, params: ModelParams) -> complex:
    """<t(x_1)..t(x_K) s(y_1)..s(y_L)>_a by explicit contraction."""
    total = 0
    tail = tuple(("s", y) for y in Y)
    for signs, weight in _sign_words(X, a):
        word = VertexWord(tuple(("+" if s > 0 else "-", x) for s, x in zip(signs, X)) + tail)
        total += weight * pair_contraction(word, params)
    return complex(total)


def ts_expectation_factorized(X: Sequence, Y: Sequence, a, params: ModelParams) -> complex:
    """Same quantity from the product formula: f-prefactors times <t...t>."""
    pref = 1
    for y in Y:
        for x in X:
            pref *= f_kernel(y / x, params)
    for j in range(len(Y)):
        for k in range(j + 1, len(Y)):
            pref *= f_kernel(Y[j] / Y[k], params) * f_kernel(Y[k] / Y[j], params)
    return complex(pref * t_vacuum_expectation(X, a, params))


# ---------------------------------------------------------------------------
# pi_R / pi_L insertions


def _c_R(n: int, sign: int, z):
    """[pi_R(c_{-n}), lambda_sign(z)] / lambda_sign(z)."""
    return (-sign) ** (n + 1) * z**n


def _c_L(n: int, sign: int, z):
    """[pi_L(c_{-n}), lambda_sign(z)] / lambda_sign(z)."""
    return -(sign ** (n + 1)) * z ** (-n)


def _cross(m: int, n: int, heis: HeisenbergSpec):
    """[pi_R(c_{-m}), pi_L(c_{-n})] from the mode algebra."""
    if m != n:
        return 0
    Am = heis.Aplus(m)
    # (d^-_m - d^+_m)(d^-_{-m} - d^+_{-m}) / A^2
    val = -heis.commutator(MINUS, m, PLUS, -m) - heis.commutator(PLUS, m, MINUS, -m)
    return val / (Am * Am)


def _wick(Ls: tuple, Rs: tuple, ells: dict, ars: dict, heis, memo):
    key = (Ls, Rs)
    if key in memo:
        return memo[key]
    if not Ls:
        val = 1
        for r in Rs:
            val *= ars[r[1]]
        memo[key] = val
        return val
    head = Ls[0]
    rest = Ls[1:]
    val = ells[head[1]] * _wick(rest, Rs, ells, ars, heis, memo)
    for j, r in enumerate(Rs):
        c = _cross(head[1], r[1], heis)
        if c != 0:
            val += c * _wick(rest, Rs[:j] + Rs[j + 1:], ells, ars, heis, memo)
    memo[key] = val
    return val


def matrix_element_tilde(h: DescendantElement, hp: DescendantElement, X: Sequence, a,
                         params: ModelParams) -> complex:
    """<1| pi_R(h) t(x_1) ... t(x_N) pi_L(h') |1>_a for chiral h, h'."""
    if not (h.is_chiral() and hp.is_chiral()):
        raise DomainError("matrix_element_tilde takes chiral elements")
    heis = HeisenbergSpec(params)
    X = list(X)
    degrees = {n for (chi, _) in h.monomials() for n in chi.parts} | \
              {n for (chi, _) in hp.monomials() for n in chi.parts}
    total = 0
    for signs, weight in _sign_words(X, a):
        word = VertexWord(tuple(("+" if s > 0 else "-", x) for s, x in zip(signs, X)))
        base = pair_contraction(word, params)
        if base == 0:
            continue
        ells = {n: sum(_c_R(n, s, x) for s, x in zip(signs, X)) for n in degrees}
        ars = {n: -sum(_c_L(n, s, x) for s, x in zip(signs, X)) for n in degrees}
        for (chi, _), c1 in h.items():
            Ls = tuple((i, n) for i, n in enumerate(chi.parts))
            for (chi2, _), c2 in hp.items():
                Rs = tuple((j, n) for j, n in enumerate(chi2.parts))
                total += weight * base * complex(c1) * complex(c2) * \
                    _wick(Ls, Rs, ells, ars, heis, {})
    return complex(total)


def tilde_to_plain(g: DescendantElement, params: ModelParams) -> DescendantElement:
    """Element whose plain J equals the tilde-J of g (Wick sum over pairings)."""
    heis = HeisenbergSpec(params)
    out = DescendantElement()
    for (chi, anti), coef in g.items():
        for kept_c, kept_a, w in _pairings(list(chi.parts), list(anti.parts), heis):
            out = out + DescendantElement.monomial(kept_c, kept_a, coef * w)
    return out


def _pairings(chi: list, anti: list, heis):
    """Yield (unpaired chiral, unpaired antichiral, weight) over partial matchings."""
    if not chi:
        yield (), tuple(anti), 1
        return
    head, rest = chi[0], chi[1:]
    for kc, ka, w in _pairings(rest, anti, heis):
        yield (head,) + kc, ka, w
    for j, n in enumerate(anti):
        c = _cross(head, n, heis)
        if c == 0:
            continue
        for kc, ka, w in _pairings(rest, anti[:j] + anti[j + 1:], heis):
            yield kc, ka, w * c


# ---------------------------------------------------------------------------
# level states


def _exp_level(tau: dict, n: int) -> dict:
    """Level-n part of exp(sum_m (tau^-_m d^-_m + tau^+_m d^+_m)/m)."""
    out: dict[tuple, complex] = {}
    for mono in level_basis(n):
        c = 1
        counts: dict[tuple, int] = {}
        for f in mono:
            counts[f] = counts.get(f, 0) + 1
        for (s, m), k in counts.items():
            c *= (tau[(s, m)] / m) ** k / factorial(k)
        out[mono] = c
    return out


def level_state_coefficients(Xi: Sequence, Eta: Sequence, a, max_level: int,
                             params: ModelParams, starred: bool = False) -> list[FockVector]:
    """Bra vectors <n; Xi; H| for n = 0..max_level.

    They are the z^{-n} coefficients of
    <1| t(z/xi_1) ... t(z/xi_k) s(z/eta_1) ... s(z/eta_l).
    With ``starred`` the f-prefactor of the t-s and s-s contractions is dropped.
    """
    Xi, Eta = list(Xi), list(Eta)
    rho = cmath.exp(1j * math.pi * a)
    pref = 1
    if not starred:
        for x in Xi:
            for y in Eta:
                pref *= f_kernel(x / y, params)
        for j in range(len(Eta)):
            for k in range(j + 1, len(Eta)):
                pref *= f_kernel(Eta[j] / Eta[k], params) * f_kernel(Eta[k] / Eta[j], params)
    levels: list[dict] = [dict() for _ in range(max_level + 1)]
    for signs in itertools.product((MINUS, PLUS), repeat=len(Xi)):
        weight = rho ** (signs.count(MINUS) - signs.count(PLUS)) * pref
        # contractions among t letters at w_i = z/xi_i
        for i in range(len(Xi)):
            for j in range(i + 1, len(Xi)):
                weight *= _contract(signs[i], 1 / Xi[i], signs[j], 1 / Xi[j], params)
        tau = {}
        for m in range(1, max_level + 1):
            tm = sum(x**m for s, x in zip(signs, Xi) if s == MINUS) + sum(y**m for y in Eta)
            tp = sum(x**m for s, x in zip(signs, Xi) if s == PLUS) + sum((-y) ** m for y in Eta)
            tau[(MINUS, m)] = tm
            tau[(PLUS, m)] = tp
        for n in range(max_level + 1):
            for mono, c in _exp_level(tau, n).items():
                levels[n][mono] = levels[n].get(mono, 0) + weight * c
    return [FockVector(lv, "bra") for lv in levels]


def invariant_lowering(m: int, params: ModelParams, side: str = "bra"):
    """(d^-_{-m} + (-1)^m d^+_{-m}) on a bra, or its mirror on a ket, as triples."""
    if side == "bra":
        return [(MINUS, -m, 1.0), (PLUS, -m, (-1) ** m)]
    return [(MINUS, m, 1.0), (PLUS, m, (-1) ** m)]


def reduction_check(v: FockVector, params: ModelParams, tol: float = 1e-10) -> bool:
    """Is v in the image of pi_R (bra) or pi_L (ket)?"""
    return reduction_defect(v, params) <= tol


def reduction_defect(v: FockVector, params: ModelParams) -> float:
    heis = HeisenbergSpec(params)
    scale = max(v.norm(), 1e-300)
    top = max(v.levels(), default=0)
    worst = 0.0
    for m in range(1, top + 1):
        w = v.apply_linear(invariant_lowering(m, params, v.side), heis)
        worst = max(worst, w.norm() / scale)
    return worst


def even_projector_apply(v: FockVector, k: int, params: ModelParams) -> FockVector:
    """Apply P_{2k} = :exp(-(d^-_{-2k}+d^+_{-2k})(d^-_{2k}+d^+_{2k})/(4k A^+_{2k})):."""
    if k < 1:
        raise DomainError("k must be positive")
    heis = HeisenbergSpec(params)
    c = 4 * k * heis.Aplus(2 * k)
    creat = [(MINUS, -2 * k, 1.0), (PLUS, -2 * k, 1.0)]
    annih = [(MINUS, 2 * k, 1.0), (PLUS, 2 * k, 1.0)]
    total = FockVector({}, v.side)
    top = max(v.levels(), default=0)
    # normal order: creators left, annihilators right
    for j in range(top // (2 * k) + 1):
        w = v
        if v.side == "ket":
            for _ in range(j):
                w = w.apply_linear(annih, heis)
            for _ in range(j):
                w = w.apply_linear(creat, heis)
        else:
            for _ in range(j):
                w = w.apply_linear(creat, heis)
            for _ in range(j):
                w = w.apply_linear(annih, heis)
        total = total + w * ((-1) ** j / (factorial(j) * c**j))
    return total


# ---------------------------------------------------------------------------
# resonance check and the level-2 construction


def w_residue(N: int, X: Sequence, params: ModelParams, radius: float = 1e-3,
              points: int = 64) -> dict:
    """Contour residue of tilde-J^{h2_a hbar2_{-a}}_{N,a} at a = -(p+1)/2.

    Returns the scaled residue 2 pi sin^2(pi p) sin(2 pi p) Res_a, the target
    J_{N,a'} with a' = (3p-1)/2, and the result at half radius.
    """
    from .jfunctions import j_value  # local import: jfunctions does not need the oracle

    p = params.p
    a0 = -(p + 1) / 2
    target = j_value(DescendantElement.one(), (3 * p - 1) / 2, list(X), params)

    def residue(r):
        acc = 0
        for m in range(points):
            u = r * cmath.exp(2j * math.pi * (m + 0.5) / points)
            a = a0 + u
            acc += matrix_element_tilde(h2_element(a, params), h2_element(-a, params), X, a, params) * u
        return acc / points

    scale = 2 * math.pi * cmath.sin(math.pi * p) ** 2 * cmath.sin(2 * math.pi * p)
    full = scale * residue(radius)
    half = scale * residue(radius / 2)
    return {"value": complex(full), "half_radius": complex(half), "target": complex(target),
            "a0": a0, "a_target": (3 * p - 1) / 2}


def level2_worked_example(a, params: ModelParams, xi1=0.9 + 0.2j, eta=1.1 - 0.3j) -> dict:
    """Solve the level-2 reduction problem with the two-parameter ansatz.

    <X| = X1 <*2; xi1, xi2| + X2 <*2; xi; eta| under the consistency
    conditions. The vector is fitted in the pi_R image and written as
    mu * h2_a + nu * c_{-1}^2. All inputs to the ansatz are even in a, so
    mu and nu must be too (this is the self-duality of h2_a).
    """
    heis = HeisenbergSpec(params)
    w = params.omega
    rho = cmath.exp(1j * math.pi * a)
    rc = rho + 1 / rho
    c = -(w - 1 / w) ** 2 / rc**4
    # (1 + u)^2 / u = c  with u = xi2/xi1; take the root with |u| <= 1
    roots = sorted(np.roots([1, 2 - c, 1]), key=lambda z: (round(abs(z), 12), z.imag))
    u = complex(roots[0])
    xi2 = xi1 * u
    xi = eta * (w - 1 / w) / rc**2
    X1 = 1.0
    X2 = rc * xi1 * xi2 / eta**2
    v1 = level_state_coefficients([xi1, xi2], [], a, 2, params, starred=True)[2]
    v2 = level_state_coefficients([xi], [eta], a, 2, params, starred=True)[2]
    vec = v1 * X1 + v2 * X2
    basis = level_basis(2)
    target = np.array(vec.to_array(basis))
    b_c2 = pi_R_vector(DescendantElement.monomial((2,)), params).to_array(basis)
    b_c11 = pi_R_vector(DescendantElement.monomial((1, 1)), params).to_array(basis)
    M = np.stack([b_c2, b_c11], axis=1)
    coef, *_ = np.linalg.lstsq(M, target, rcond=None)
    fit_res = float(np.linalg.norm(M @ coef - target) / max(np.linalg.norm(target), 1e-300))
    c2, c11 = complex(coef[0]), complex(coef[1])
    den = math.sin(math.pi * params.p) - math.sin(2 * math.pi * a)
    mu = c2 * den
    nu = c11 + 1j * math.tan(math.pi * a) * c2
    return {
        "vector": vec,
        "xi": (xi1, xi2, xi, eta),
        "X": (X1, X2),
        "reduction_defect": reduction_defect(vec, params),
        "pi_R_coefficients": {"c-2": c2, "c-1^2": c11},
        "pi_R_fit_residual": fit_res,
        "h2_coefficient": mu,
        "h11_coefficient": nu,
        "heis": heis,
    }
