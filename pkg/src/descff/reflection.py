"""Reflection maps r_a on the chiral levels, periodicity and clustering.

The reflection at level n is a p(n) x p(n) matrix M(a) with

    J^{h_i}_{N,a}(X) = sum_j M_ij(a) J^{h_j}_{N,-a}(X)

for the monomial basis h_i of the level, independent of N and X. The
solver samples (N, X), evaluates each basis J once as a Laurent
polynomial in rho and reads off both sides from it.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra_core import (
    DescendantElement,
    ModelParams,
    Partition,
    annulus_points,
    enumerate_partitions,
    h2_element,
)
from .errors import DegenerateParameterError, DomainError, FitError
from .jfunctions import j_rho, j_value

__all__ = [
    "ReflectionSolution",
    "solve_reflection",
    "apply_reflection",
    "verify_periodicity",
    "verify_cluster",
    "self_dual_level2",
]


@dataclass(frozen=True)
class ReflectionSolution:
    level: int
    a: complex
    basis: list[Partition]
    matrix: np.ndarray
    residual: float
    condition: float
    involution_defect: float
    holdout_residual: float | None
    samples: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "a": _cj(self.a),
            "basis": [lam.label() for lam in self.basis],
            "matrix": [[_cj(z) for z in row] for row in self.matrix],
            "residual": self.residual,
            "condition": self.condition,
            "involution_defect": self.involution_defect,
            "holdout_residual": self.holdout_residual,
            "samples": self.samples,
        }


def _cj(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _lstsq(B: np.ndarray, R: np.ndarray):
    """Solve B M^T = R with row and column scaling; returns (M, rel residual, cond)."""
    rows = np.maximum(np.max(np.abs(np.hstack([B, R])), axis=1), 1e-300)
    Bs = B / rows[:, None]
    Rs = R / rows[:, None]
    cols = np.maximum(np.linalg.norm(Bs, axis=0), 1e-300)
    sol, *_ = np.linalg.lstsq(Bs / cols, Rs, rcond=None)
    sol = sol / cols[:, None]
    res = np.linalg.norm(Bs @ sol - Rs) / max(np.linalg.norm(Rs), 1e-300)
    sv = np.linalg.svd(Bs / cols, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    return sol.T, float(res), cond


def solve_reflection(n: int, a, params: ModelParams, N_max: int | None = None,
                     samples: int | None = None, seed: int = 0) -> ReflectionSolution:
    """Least-squares solve for M(a) at level n.

    Constraints come from N = 1..N_max - 1 (N = 0 too at level 0); the
    top value N_max is held out and used to test N-independence.
    """
    if n < 0:
        raise DomainError("level must be nonnegative")
    params.check_generic(a)
    if N_max is None:
        N_max = n + 4
    basis = enumerate_partitions(n)
    elems = [DescendantElement.monomial(lam.parts) for lam in basis]
    dim = len(basis)
    per_N = samples or max(2, dim)
    rng = np.random.default_rng(seed)
    rho = cmath.exp(1j * math.pi * a)

    def block(N, count):
        lhs, rhs = [], []
        for _ in range(count):
            X = annulus_points(rng, N, params)
            polys = [j_rho(h, X, params) for h in elems]
            lhs.append([complex(q(rho)) for q in polys])
            rhs.append([complex(q(1 / rho)) for q in polys])
        return np.array(lhs, dtype=complex), np.array(rhs, dtype=complex)

    Ns = list(range(0 if n == 0 else 1, N_max))
    L_parts, R_parts = [], []
    for N in Ns:
        L, R = block(N, 1 if N == 0 else per_N)
        L_parts.append(L)
        R_parts.append(R)
    L = np.vstack(L_parts)
    R = np.vstack(R_parts)
    if L.shape[0] < dim:
        raise FitError("too few constraints for the level; raise samples or N_max", residual=math.inf)
    # rows: J_a = M J_{-a}
    M, res, sampling_cond = _lstsq(R, L)
    Minv, _, _ = _lstsq(L, R)
    inv_defect = float(np.linalg.norm(M @ Minv - np.eye(dim)))

    holdout = None
    if N_max >= 1:
        Lh, Rh = block(N_max, per_N)
        pred = Rh @ M.T
        holdout = float(np.linalg.norm(pred - Lh) / max(np.linalg.norm(Lh), 1e-300))
    if not math.isfinite(sampling_cond) or sampling_cond > 1e12:
        raise FitError(f"rank-deficient sampling (condition {sampling_cond:.3g}); add samples or "
                       f"raise N_max", residual=res)
    # M itself goes singular at the degeneracy lattice
    cond = float(np.linalg.cond(M))
    meta = {"N_values": Ns, "per_N": per_N, "seed": seed, "rows": int(L.shape[0]), "holdout_N": N_max,
            "sampling_condition": sampling_cond}
    return ReflectionSolution(level=n, a=a, basis=basis, matrix=M, residual=res, condition=cond,
                              involution_defect=inv_defect, holdout_residual=holdout, samples=meta)


def apply_reflection(sol: ReflectionSolution, h: DescendantElement) -> DescendantElement:
    """r_a(h) for a chiral element h of the solution's level.

    If h = sum u_i h_i then J^h_a = J^{h'}_{-a} with h' = sum (M^T u)_j h_j.
    """
    if not h.is_chiral():
        raise DomainError("reflection acts on chiral elements here")
    index = {lam: i for i, lam in enumerate(sol.basis)}
    u = np.zeros(len(sol.basis), dtype=complex)
    for (chi, _), c in h.items():
        if chi not in index:
            raise DomainError(f"monomial {chi.label()} is not at level {sol.level}")
        u[index[chi]] += complex(c)
    v = sol.matrix.T @ u
    return DescendantElement({(lam, Partition(())): complex(c)
                              for lam, c in zip(sol.basis, v) if c != 0})


def verify_periodicity(g: DescendantElement, a, X: Sequence, params: ModelParams,
                       tol: float | None = None) -> bool:
    """J^g_{N,a+1}(X) == (-1)^N J^g_{N,a}(X)."""
    tol = params.tol if tol is None else tol
    lhs = j_value(g, a + 1, X, params)
    rhs = (-1) ** len(X) * j_value(g, a, X, params)
    return abs(lhs - rhs) <= tol * max(abs(lhs), abs(rhs), 1.0)


def verify_cluster(h: DescendantElement, hp: DescendantElement, a, X: Sequence, Xp: Sequence,
                   params: ModelParams, Lambda: float = 20.0) -> float:
    """Relative deviation of J^{h hbar'}(X e^L, X') from J^h(X e^L) J^{hbar'}(X')."""
    if not (h.is_chiral() and hp.is_chiral()):
        raise DomainError("h and h' are given as chiral elements")
    scale = math.exp(Lambda)
    far = [x * scale for x in X]
    joint = j_value(h * hp.bar(), a, far + list(Xp), params)
    prod = j_value(h, a, far, params) * j_value(hp.bar(), a, list(Xp), params)
    return abs(joint - prod) / max(abs(prod), 1e-300)


def self_dual_level2(a, params: ModelParams) -> tuple[DescendantElement, DescendantElement]:
    """The pair (h^(1,1)_a, h^(2)_a) mapped to itself by r_a."""
    dist, name = params.degeneracy_distance(a)
    if dist < params.degeneracy_margin:
        raise DegenerateParameterError(f"h2 is undefined at the degeneracy point a = {name} (mod 1)")
    try:
        h2 = h2_element(a, params)
    except DegenerateParameterError as exc:
        raise DegenerateParameterError(f"{exc}; nearest lattice point a = {name} (mod 1)") from None
    return DescendantElement.monomial((1, 1)), h2
