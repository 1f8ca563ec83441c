"""Descendant labels and the symmetric functionals P^g.

The graded algebra A (x) Abar is generated by c_{-n} and cbar_{-n}, n >= 1.
A monomial is a pair of partitions (chiral, antichiral); an element is a
finite linear combination of monomials whose coefficients are either plain
complex numbers or Laurent polynomials in rho = exp(i pi a).

Everything here is immutable after construction.
"""

from __future__ import annotations

import cmath
import json
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DegenerateParameterError, DomainError

__all__ = [
    "Partition",
    "RhoLaurent",
    "DescendantElement",
    "ModelParams",
    "enumerate_partitions",
    "partition_count",
    "power_sum",
    "eval_p",
    "check_kinematic_chain",
    "level_rank",
    "annulus_points",
    "parse_element",
    "h2_element",
]


# ---------------------------------------------------------------------------
# partitions


@dataclass(frozen=True, order=True)
class Partition:
    """Multiset of positive integers, stored nonincreasing.

    ``Partition((2, 1, 1))`` labels the monomial c_{-2} c_{-1}^2.
    """

    parts: tuple[int, ...] = ()

    def __post_init__(self):
        parts = tuple(sorted((int(k) for k in self.parts), reverse=True))
        if parts and parts[-1] < 1:
            raise DomainError(f"partition parts must be >= 1, got {parts}")
        object.__setattr__(self, "parts", parts)

    @property
    def level(self) -> int:
        return sum(self.parts)

    @classmethod
    def from_multiplicities(cls, mult: Mapping[int, int]) -> "Partition":
        parts: list[int] = []
        for k, m in mult.items():
            parts.extend([int(k)] * int(m))
        return cls(tuple(parts))

    def multiplicities(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for k in self.parts:
            out[k] = out.get(k, 0) + 1
        return out

    def __mul__(self, other: "Partition") -> "Partition":
        return Partition(self.parts + other.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __bool__(self) -> bool:
        return bool(self.parts)

    def label(self, prefix: str = "c") -> str:
        if not self.parts:
            return "1"
        items = sorted(self.multiplicities().items())
        return "*".join(f"{prefix}-{k}" + (f"^{m}" if m > 1 else "") for k, m in items)

    def __str__(self) -> str:
        return self.label()


EMPTY = Partition(())


@lru_cache(maxsize=None)
def _partitions(n: int, largest: int) -> tuple[tuple[int, ...], ...]:
    if n == 0:
        return ((),)
    out = []
    for k in range(min(n, largest), 0, -1):
        for rest in _partitions(n - k, k):
            out.append((k,) + rest)
    return tuple(out)


def enumerate_partitions(n: int) -> list[Partition]:
    """All partitions of ``n``, each once, in reverse lexicographic order.

    >>> [p.parts for p in enumerate_partitions(4)]
    [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]
    """
    if n < 0:
        raise DomainError("n must be nonnegative")
    return [Partition(p) for p in _partitions(int(n), int(n))]


def partition_count(n: int) -> int:
    """Coefficient of q^n in prod_k (1 - q^k)^{-1} (Euler recurrence)."""
    if n < 0:
        return 0
    table = [1] + [0] * n
    for k in range(1, n + 1):
        for m in range(k, n + 1):
            table[m] += table[m - k]
    return table[n]


# ---------------------------------------------------------------------------
# power sums


def power_sum(r: int, X: Sequence) -> complex:
    """S_r(X) = sum_i x_i^r.

    Negative ``r`` requires nonzero entries.
    """
    r = int(r)
    if r == 0:
        raise DomainError("power sums are defined for r != 0")
    total = 0
    for x in X:
        if r < 0 and x == 0:
            raise DomainError("zero coordinate in a negative power sum")
        total = total + x**r
    return total


# ---------------------------------------------------------------------------
# Laurent polynomials in rho


class RhoLaurent:
    """Laurent polynomial sum_d c_d rho^d with complex coefficients.

    Zero coefficients are dropped on construction.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Mapping[int, complex] | None = None):
        clean = {}
        for d, c in (coeffs or {}).items():
            if c != 0:
                clean[int(d)] = c
        self._coeffs = dict(sorted(clean.items()))

    @property
    def coeffs(self) -> dict[int, complex]:
        return dict(self._coeffs)

    @classmethod
    def constant(cls, c) -> "RhoLaurent":
        return cls({0: c})

    @classmethod
    def monomial(cls, degree: int, c=1.0) -> "RhoLaurent":
        return cls({degree: c})

    def degrees(self) -> list[int]:
        return list(self._coeffs)

    def __getitem__(self, d: int):
        return self._coeffs.get(d, 0)

    def __iter__(self):
        return iter(self._coeffs.items())

    def __bool__(self) -> bool:
        return bool(self._coeffs)

    def __add__(self, other):
        if not isinstance(other, RhoLaurent):
            other = RhoLaurent.constant(other)
        out = dict(self._coeffs)
        for d, c in other._coeffs.items():
            out[d] = out.get(d, 0) + c
        return RhoLaurent(out)

    __radd__ = __add__

    def __neg__(self):
        return RhoLaurent({d: -c for d, c in self._coeffs.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, RhoLaurent) else -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, RhoLaurent):
            out: dict[int, complex] = {}
            for d1, c1 in self._coeffs.items():
                for d2, c2 in other._coeffs.items():
                    out[d1 + d2] = out.get(d1 + d2, 0) + c1 * c2
            return RhoLaurent(out)
        return RhoLaurent({d: c * other for d, c in self._coeffs.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return RhoLaurent({d: c / scalar for d, c in self._coeffs.items()})

    def __call__(self, rho):
        return sum((c * rho**d for d, c in self._coeffs.items()), 0)

    def at_a(self, a):
        """Evaluate at rho = exp(i pi a)."""
        return self(cmath.exp(1j * math.pi * a))

    def reflect(self) -> "RhoLaurent":
        """rho -> 1/rho, i.e. a -> -a."""
        return RhoLaurent({-d: c for d, c in self._coeffs.items()})

    def d_da(self) -> "RhoLaurent":
        """Exact derivative in a: d(rho^d)/da = i pi d rho^d."""
        return RhoLaurent({d: 1j * math.pi * d * c for d, c in self._coeffs.items()})

    def parity_defect(self, N: int) -> float:
        """Largest |c_d| with d of parity different from N."""
        return max((abs(c) for d, c in self._coeffs.items() if (d - N) % 2), default=0.0)

    def palindromy_defect(self) -> float:
        """max_d |c_d - c_{-d}| relative to the largest coefficient."""
        scale = max((abs(c) for c in self._coeffs.values()), default=0.0)
        if scale == 0:
            return 0.0
        worst = max(abs(self[d] - self[-d]) for d in self._coeffs)
        return worst / scale

    def divmod_cos(self) -> tuple["RhoLaurent", "RhoLaurent"]:
        """Divide by (rho + 1/rho).

        Returns (quotient, remainder) with the remainder supported on the
        two lowest degrees of the input.
        """
        if not self._coeffs:
            return RhoLaurent(), RhoLaurent()
        work = dict(self._coeffs)
        lo = min(work)
        quotient: dict[int, complex] = {}
        for d in range(max(work), lo + 1, -1):
            c = work.pop(d, 0)
            if c == 0:
                continue
            # c rho^d = c rho^(d-1) (rho + 1/rho) - c rho^(d-2)
            quotient[d - 1] = c
            work[d - 2] = work.get(d - 2, 0) - c
        return RhoLaurent(quotient), RhoLaurent(work)

    def max_abs(self) -> float:
        return max((abs(c) for c in self._coeffs.values()), default=0.0)

    def to_json(self) -> dict:
        return {str(d): {"re": float(complex(c).real), "im": float(complex(c).imag)}
                for d, c in self._coeffs.items()}

    @classmethod
    def from_json(cls, obj: Mapping) -> "RhoLaurent":
        return cls({int(d): complex(v["re"], v["im"]) for d, v in obj.items()})

    def __repr__(self) -> str:
        body = " + ".join(f"({complex(c):.6g})*rho^{d}" for d, c in self._coeffs.items())
        return f"RhoLaurent({body or '0'})"


# ---------------------------------------------------------------------------
# elements of A (x) Abar

MonomialKey = tuple  # (Partition chiral, Partition antichiral)


def _is_rho(c) -> bool:
    return isinstance(c, RhoLaurent)


class DescendantElement:
    """Finite combination sum coeff * c_{-lambda} cbar_{-mu}.

    Parameters
    ----------
    terms : mapping
        ``{(Partition, Partition): coefficient}``. Coefficients are all
        numbers or all :class:`RhoLaurent`; mixing raises.
    """

    __slots__ = ("_terms", "_mode")

    def __init__(self, terms: Mapping[MonomialKey, object] | None = None):
        clean: dict[MonomialKey, object] = {}
        mode = None
        for key, c in (terms or {}).items():
            chi, anti = key
            if not isinstance(chi, Partition):
                chi = Partition(tuple(chi))
            if not isinstance(anti, Partition):
                anti = Partition(tuple(anti))
            this = "rho" if _is_rho(c) else "complex"
            if mode is None:
                mode = this
            elif mode != this:
                raise DomainError("mixed coefficient modes in one element")
            k = (chi, anti)
            clean[k] = clean[k] + c if k in clean else c
        self._terms = {k: v for k, v in clean.items() if (bool(v) if _is_rho(v) else v != 0)}
        self._mode = mode or "complex"

    # construction helpers
    @classmethod
    def one(cls, coeff=1.0) -> "DescendantElement":
        return cls({(EMPTY, EMPTY): coeff})

    @classmethod
    def monomial(cls, chiral: Iterable[int] = (), antichiral: Iterable[int] = (),
                 coeff=1.0) -> "DescendantElement":
        return cls({(Partition(tuple(chiral)), Partition(tuple(antichiral))): coeff})

    @classmethod
    def c(cls, n: int) -> "DescendantElement":
        return cls.monomial((n,))

    @classmethod
    def cbar(cls, n: int) -> "DescendantElement":
        return cls.monomial((), (n,))

    @property
    def terms(self) -> dict[MonomialKey, object]:
        return dict(self._terms)

    @property
    def mode(self) -> str:
        return self._mode

    def items(self):
        return self._terms.items()

    def monomials(self) -> list[MonomialKey]:
        return list(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def levels(self) -> set[tuple[int, int]]:
        return {(chi.level, anti.level) for chi, anti in self._terms}

    def is_homogeneous(self) -> bool:
        return len(self.levels()) <= 1

    def level(self) -> tuple[int, int]:
        levels = self.levels()
        if len(levels) > 1:
            raise DomainError("element is not homogeneous")
        return next(iter(levels), (0, 0))

    def is_chiral(self) -> bool:
        return all(not anti for _, anti in self._terms)

    def bar(self) -> "DescendantElement":
        """Map a chiral element h to hbar (c_{-n} -> cbar_{-n})."""
        if not self.is_chiral():
            raise DomainError("bar() expects a purely chiral element")
        return DescendantElement({(EMPTY, chi): c for (chi, _), c in self._terms.items()})

    # arithmetic
    def __add__(self, other):
        if not isinstance(other, DescendantElement):
            other = DescendantElement.one(other)
        merged = dict(self._terms)
        for k, c in other._terms.items():
            merged[k] = merged[k] + c if k in merged else c
        return DescendantElement(merged)

    __radd__ = __add__

    def __neg__(self):
        return DescendantElement({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, DescendantElement):
            out: dict[MonomialKey, object] = {}
            for (c1, a1), v1 in self._terms.items():
                for (c2, a2), v2 in other._terms.items():
                    k = (c1 * c2, a1 * a2)
                    v = v1 * v2
                    out[k] = out[k] + v if k in out else v
            return DescendantElement(out)
        return DescendantElement({k: c * other for k, c in self._terms.items()})

    def __rmul__(self, other):
        return self * other

    def __pow__(self, k: int):
        out = DescendantElement.one()
        for _ in range(int(k)):
            out = out * self
        return out

    def coefficient(self, chiral=(), antichiral=()):
        key = (Partition(tuple(chiral)), Partition(tuple(antichiral)))
        return self._terms.get(key, 0)

    def evaluate_coefficients(self, a) -> "DescendantElement":
        """Replace RhoLaurent coefficients by their value at a."""
        if self._mode != "rho":
            return self
        return DescendantElement({k: c.at_a(a) for k, c in self._terms.items()})

    def approx_equal(self, other: "DescendantElement", tol: float = 1e-12) -> bool:
        keys = set(self._terms) | set(other._terms)
        for k in keys:
            if abs(complex(self._terms.get(k, 0)) - complex(other._terms.get(k, 0))) > tol:
                return False
        return True

    # serialization
    def to_json(self) -> list[dict]:
        out = []
        for (chi, anti), c in sorted(self._terms.items(), key=lambda kv: (kv[0][0].parts, kv[0][1].parts)):
            if _is_rho(c):
                coeff = {"rho_degrees": c.to_json()}
            else:
                c = complex(c)
                coeff = {"re": c.real, "im": c.imag}
            out.append({"chiral": list(chi.parts), "antichiral": list(anti.parts), "coeff": coeff})
        return out

    @classmethod
    def from_json(cls, obj) -> "DescendantElement":
        if isinstance(obj, str):
            obj = json.loads(obj)
        terms = {}
        for item in obj:
            coeff = item.get("coeff", {"re": 1.0, "im": 0.0})
            if "rho_degrees" in coeff:
                c = RhoLaurent.from_json(coeff["rho_degrees"])
            else:
                c = complex(coeff.get("re", 0.0), coeff.get("im", 0.0))
            key = (Partition(tuple(item.get("chiral", ()))), Partition(tuple(item.get("antichiral", ()))))
            terms[key] = terms[key] + c if key in terms else c
        return cls(terms)

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for (chi, anti), c in self._terms.items():
            labels = [s for s in (chi.label("c") if chi else "", anti.label("cbar") if anti else "") if s]
            mono = "*".join(labels) or "1"
            if _is_rho(c):
                pieces.append(f"[{c!r}]*{mono}")
            else:
                c = complex(c)
                pieces.append(mono if c == 1 else f"({c.real:.12g}{c.imag:+.12g}j)*{mono}")
        return " + ".join(pieces)

    __repr__ = __str__


_TOKEN = re.compile(r"^(cbar|c)-(\d+)(?:\^(\d+))?$")


def _split_top(text: str, sep: str) -> list[str]:
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return out


def parse_element(text: str) -> DescendantElement:
    """Parse inline syntax such as ``"c-1^2*c-2 + (0.5+0i)*cbar-3"``.

    JSON input (a list of term objects) is accepted as well.
    """
    text = text.strip()
    if text.startswith("["):
        return DescendantElement.from_json(text)
    total = DescendantElement()
    for term in _split_top(text.replace(" ", ""), "+"):
        if not term:
            raise DomainError(f"empty term in element string {text!r}")
        coeff: complex = 1.0
        chi: list[int] = []
        anti: list[int] = []
        for factor in _split_top(term, "*"):
            m = _TOKEN.match(factor)
            if m:
                kind, n, k = m.group(1), int(m.group(2)), int(m.group(3) or 1)
                if n < 1:
                    raise DomainError(f"generator index must be >= 1 in {factor!r}")
                (anti if kind == "cbar" else chi).extend([n] * k)
                continue
            num = factor[1:-1] if factor.startswith("(") and factor.endswith(")") else factor
            try:
                coeff = coeff * complex(num.replace("i", "j"))
            except ValueError as exc:
                raise DomainError(f"cannot parse factor {factor!r}") from exc
        total = total + DescendantElement.monomial(chi, anti, coeff)
    return total


# ---------------------------------------------------------------------------
# model parameters


@dataclass(frozen=True)
class ModelParams:
    """Coupling and numerical settings.

    Attributes
    ----------
    p : complex
        Generic coupling; omega = exp(i pi p).
    a : complex or None
        Exponent label, a = (alpha - alpha0) / (2 alpha0).
    m : float
        Breather mass scale.
    tol : float
        Default tolerance for identity checks.
    precision : {"double", "extended"}
    degeneracy_margin : float
        Minimal distance of a from the lattice +-p/2, +-(1+p)/2 (mod 1).
    """

    p: complex = 0.3
    a: complex | None = None
    m: float = 1.0
    tol: float = 1e-10
    precision: str = "double"
    degeneracy_margin: float = 1e-6
    extra: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.precision not in ("double", "extended"):
            raise DomainError("precision must be 'double' or 'extended'")
        if not self.tol > 0:
            raise DomainError("tolerance must be positive")
        if self.m <= 0:
            raise DomainError("mass scale must be positive")

    @property
    def omega(self) -> complex:
        return cmath.exp(1j * math.pi * self.p)

    @property
    def sin_pi_p(self) -> complex:
        return cmath.sin(math.pi * self.p)

    @property
    def beta2(self) -> complex:
        return 2 * self.p / (self.p + 1)

    @property
    def alpha0(self) -> complex:
        return 1 / cmath.sqrt(2 * self.p * (self.p + 1))

    def alpha(self, a=None) -> complex:
        a = self.a if a is None else a
        return self.alpha0 * (2 * a + 1)

    def a_from_alpha(self, alpha) -> complex:
        return (alpha - self.alpha0) / (2 * self.alpha0)

    @property
    def J1(self) -> float:
        """Eigenvalue constant J_1 = -m/2 of the first integral of motion."""
        return -self.m / 2

    def with_(self, **kw) -> "ModelParams":
        data = {k: getattr(self, k) for k in ("p", "a", "m", "tol", "precision", "degeneracy_margin")}
        data.update(kw)
        return ModelParams(**data)

    def lattice_points(self) -> list[tuple[str, complex]]:
        p = self.p
        return [("p/2", p / 2), ("-p/2", -p / 2), ("(1+p)/2", (1 + p) / 2), ("-(1+p)/2", -(1 + p) / 2)]

    def degeneracy_distance(self, a=None) -> tuple[float, str]:
        """Distance of a (mod 1) to the nearest lattice point and its name."""
        a = self.a if a is None else a
        best, name = math.inf, ""
        for label, pt in self.lattice_points():
            d = a - pt
            d = d - round(d.real)
            if abs(d) < best:
                best, name = abs(d), label
        return best, name

    def check_generic(self, a=None) -> None:
        dist, name = self.degeneracy_distance(a)
        if dist < self.degeneracy_margin:
            raise DegenerateParameterError(
                f"a = {a if a is not None else self.a} is on the degeneracy lattice at a = {name} (mod 1)")


# ---------------------------------------------------------------------------
# P functionals


def _p_generator(n: int, antichiral: bool, Xm: Sequence, Xp: Sequence):
    sign = -1 if n % 2 else 1
    if antichiral:
        return power_sum(-n, Xp) - sign * power_sum(-n, Xm)
    return power_sum(n, Xm) - sign * power_sum(n, Xp)


def eval_p(g: DescendantElement, Xm: Sequence, Xp: Sequence):
    """P^g(Xm|Xp), multiplicative on monomials and linear in g.

    Returns a number, or a :class:`RhoLaurent` when g carries rho
    coefficients.
    """
    cache: dict[tuple[int, bool], object] = {}

    def gen(n, anti):
        key = (n, anti)
        if key not in cache:
            cache[key] = _p_generator(n, anti, Xm, Xp)
        return cache[key]

    total = RhoLaurent() if g.mode == "rho" else 0
    for (chi, anti), coeff in g.items():
        value = 1
        for n in chi.parts:
            value = value * gen(n, False)
        for n in anti.parts:
            value = value * gen(n, True)
        total = total + coeff * value
    return total


def check_kinematic_chain(g: DescendantElement, X: Sequence, x, Y: Sequence,
                          tol: float = 1e-10) -> bool:
    """Does P^g(X, -x | x, Y) equal P^g(X | Y)?"""
    lhs = eval_p(g, list(X) + [-x], [x] + list(Y))
    rhs = eval_p(g, X, Y)
    if isinstance(lhs, RhoLaurent):
        diff = (lhs - rhs).max_abs()
        scale = max(lhs.max_abs(), rhs.max_abs(), 1.0)
    else:
        diff = abs(lhs - rhs)
        scale = max(abs(lhs), abs(rhs), 1.0)
    return diff <= tol * scale


def annulus_points(rng: np.random.Generator, count: int, params: ModelParams | None = None,
                   r_min: float = 0.5, r_max: float = 2.0, sep: float = 0.05,
                   max_tries: int = 10000) -> list[complex]:
    """Random complex points with r_min <= |x| <= r_max.

    Pairwise ratios x_i/x_j are kept at distance >= sep from 1, -1, omega,
    1/omega and their negatives (poles and zeros of f).
    """
    omega = params.omega if params is not None else cmath.exp(0.3j * math.pi)
    forbidden = [1, -1, omega, 1 / omega, -omega, -1 / omega]
    pts: list[complex] = []
    tries = 0
    while len(pts) < count:
        tries += 1
        if tries > max_tries:
            raise DomainError("could not place separated sample points")
        r = math.exp(rng.uniform(math.log(r_min), math.log(r_max)))
        z = r * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        ok = True
        for w in pts:
            for ratio in (z / w, w / z):
                if any(abs(ratio - q) < sep for q in forbidden):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            pts.append(z)
    return pts


def _numerical_rank(M: np.ndarray, tol: float) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def level_rank(n: int, params: ModelParams, num_vars: int, seed: int = 0,
               tol: float = 1e-9, samples: int | None = None) -> int:
    """Numerical rank of {P^h : h a level-n chiral monomial} as functions.

    Each row evaluates all monomials at one random point with
    ``num_vars`` coordinates split between X_- and X_+.
    """
    if n < 0:
        raise DomainError("level must be nonnegative")
    if num_vars < 2 * n:
        raise DomainError("need num_vars >= 2n for functional independence")
    basis = [DescendantElement.monomial(lam.parts) for lam in enumerate_partitions(n)]
    rows = samples or max(2 * len(basis), len(basis) + 5)
    rng = np.random.default_rng(seed)
    n_minus = (num_vars + 1) // 2
    M = np.empty((rows, len(basis)), dtype=complex)
    for r in range(rows):
        pts = annulus_points(rng, num_vars, params)
        Xm, Xp = pts[:n_minus], pts[n_minus:]
        M[r] = [complex(eval_p(h, Xm, Xp)) for h in basis]
        M[r] /= max(np.max(np.abs(M[r])), 1e-300)
    return _numerical_rank(M, tol)


def h2_element(a, params: ModelParams) -> DescendantElement:
    """h^(2)_a = (c_{-2} - i tan(pi a) c_{-1}^2)/(sin pi p - sin 2 pi a)."""
    den = cmath.sin(math.pi * params.p) - cmath.sin(2 * math.pi * a)
    if abs(den) < 1e-14:
        raise DegenerateParameterError(f"sin pi p = sin 2 pi a at a = {a}")
    tan = cmath.tan(math.pi * a)
    return DescendantElement({(Partition((2,)), EMPTY): 1 / den,
                              (Partition((1, 1)), EMPTY): -1j * tan / den})
