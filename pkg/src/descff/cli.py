"""Command line front end.

    descff eval --element "c-1^2" --x 1,2 --a 0.1 --p 0.3
    descff verify --suite eom
    descff reflect --n 2 --a 0.13 --p 0.31
    descff constants --a 0.2 --theta 0.5,1.0

Every command prints one JSON document tagged ``"schema": "descff/1"``.
Exit codes: 0 success, 1 identity failure, 2 usage or domain error,
3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import cmath
import json
import math
import sys
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .algebra_core import DescendantElement, ModelParams, annulus_points, parse_element
from .errors import ConvergenceError, DescffError, DomainError, FitError

SCHEMA = "descff/1"
SUITES = ("oracle", "residues", "reflection", "eom", "em", "kink", "all")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    p: float
    a: float | None
    element: str
    n: int | None
    x: tuple | None
    theta: tuple | None
    seed: int
    tol: float
    precision: str
    suite: str
    json_out: str | None

    def params(self) -> ModelParams:
        return ModelParams(p=self.p, a=self.a, tol=self.tol, precision=self.precision)


def _cj(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _complex_list(text: str | None) -> tuple | None:
    if text is None:
        return None
    if not text.strip():
        return ()
    try:
        return tuple(complex(tok.strip().replace("i", "j")) for tok in text.split(","))
    except ValueError as exc:
        raise UsageError(f"cannot parse complex list {text!r}") from exc


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=float, default=0.3, help="coupling p (default 0.3)")
    common.add_argument("--a", type=float, default=None, help="exponent label a")
    common.add_argument("--element", default="1", help='element, inline ("c-2 + (0.5+0i)*cbar-1") or JSON')
    common.add_argument("--n", type=int, default=None, help="particle count (eval) or level (reflect)")
    common.add_argument("--x", default=None, help="comma separated points x_i")
    common.add_argument("--theta", default=None, help="comma separated rapidities")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=1e-8)
    common.add_argument("--precision", choices=("double", "extended"), default="double")
    common.add_argument("--suite", choices=SUITES, default="all")
    common.add_argument("--json-out", default=None, metavar="PATH")

    ap = argparse.ArgumentParser(prog="descff", description="Breather form factors of descendant operators.")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("eval", parents=[common], help="evaluate J^g_{N,a} (and the form factor with --theta)")
    sub.add_parser("verify", parents=[common], help="run an identity suite")
    sub.add_parser("reflect", parents=[common], help="solve the reflection matrix at level --n")
    sub.add_parser("constants", parents=[common], help="G_a, R_a, lambda' and R(theta)")
    return ap


def _config(ns: argparse.Namespace) -> RunConfig:
    if ns.tol <= 0:
        raise UsageError("--tol must be positive")
    return RunConfig(command=ns.command, p=ns.p, a=ns.a, element=ns.element, n=ns.n,
                     x=_complex_list(ns.x), theta=_complex_list(ns.theta), seed=ns.seed,
                     tol=ns.tol, precision=ns.precision, suite=ns.suite, json_out=ns.json_out)


# ---------------------------------------------------------------------------
# commands


def cmd_eval(cfg: RunConfig) -> tuple[dict, int]:
    from .jfunctions import assemble_form_factor, j_direct

    if cfg.a is None:
        raise UsageError("eval needs --a")
    params = cfg.params()
    g = parse_element(cfg.element)
    if cfg.theta is not None:
        X = [cmath.exp(t) for t in cfg.theta]
    elif cfg.x is not None:
        X = list(cfg.x)
    elif cfg.n is not None:
        X = annulus_points(np.random.default_rng(cfg.seed), cfg.n, params)
    else:
        raise UsageError("eval needs --x, --theta or --n")
    if cfg.n is not None and cfg.n != len(X):
        raise UsageError(f"--n {cfg.n} does not match {len(X)} points")
    res = j_direct(g, cfg.a, X, params)
    doc = {"command": "eval", "x": [_cj(x) for x in X], "result": res.to_json()}
    if cfg.theta is not None:
        doc["form_factor"] = _cj(assemble_form_factor(g, cfg.a, list(cfg.theta), params))
    return doc, 0


def _check(name: str, deviation: float, tol: float, **extra) -> dict:
    return {"name": name, "deviation": float(deviation), "tol": tol,
            "pass": bool(deviation <= tol), **extra}


def _suite_oracle(params, rng, tol):
    from .fock_oracle import t_vacuum_expectation
    from .jfunctions import j_value

    out = []
    for N in range(0, 7):
        a = float(rng.uniform(-0.45, 0.45))
        X = annulus_points(rng, N, params)
        ref = j_value(DescendantElement.one(), a, X, params)
        val = t_vacuum_expectation(X, a, params)
        out.append(_check(f"oracle N={N}", abs(val - ref) / max(abs(ref), 1e-300), tol))
    return out


def _suite_residues(params, rng, tol):
    from .jfunctions import numerical_residue, residue_kinematic

    out = []
    one = DescendantElement.one()
    for N in (4, 6):
        X = annulus_points(rng, N, params)
        total = sum(residue_kinematic(one, 0.17, X[:i] + X[i + 1:], X[i], params) for i in range(N))
        out.append(_check(f"sum of residues N={N}", abs(total), tol))
    g = DescendantElement.c(2)
    X = annulus_points(rng, 3, params)
    exact = residue_kinematic(g, 0.17, X[:2], X[2], params)
    num = numerical_residue(g, 0.17, X[:2], X[2], params)
    out.append(_check("kinematic residue c-2 N=4", abs(exact - num) / abs(exact), max(tol, 1e-6)))
    return out


def _suite_reflection(params, rng, tol):
    from .reflection import apply_reflection, self_dual_level2, solve_reflection

    a = 0.13
    out = []
    for n in range(0, 4):
        sol = solve_reflection(n, a, params, seed=int(rng.integers(1 << 30)))
        out.append(_check(f"reflection level {n}", max(sol.residual, sol.holdout_residual or 0.0), tol,
                          involution_defect=sol.involution_defect, condition=sol.condition))
        out.append(_check(f"involution level {n}", sol.involution_defect, max(tol, 1e-7)))
        if n == 2:
            h2 = self_dual_level2(a, params)[1]
            h2m = self_dual_level2(-a, params)[1]
            r = apply_reflection(sol, h2) - h2m
            dev = max((abs(complex(c)) for _, c in r.items()), default=0.0)
            out.append(_check("h2 self-duality", dev, tol))
    return out


def _suite_eom(params, rng, tol):
    from .identities import check_eom

    return [_check(f"eom N={N}", check_eom(N, annulus_points(rng, N, params), params, tol).deviation, tol)
            for N in (1, 3, 5)]


def _suite_em(params, rng, tol):
    from .identities import check_em_conservation, check_T_identification

    out = [_check(f"em N={N}",
                  check_em_conservation(N, annulus_points(rng, N, params), params, tol).deviation, tol)
           for N in (0, 2, 4)]
    out += [_check(f"T N={N}",
                   check_T_identification(N, annulus_points(rng, N, params), params, tol).deviation, tol)
            for N in (2, 4)]
    return out


def _suite_kink(params, rng, tol):
    from .algebra_core import enumerate_partitions
    from .kink_algebra import chain_defect, pq_consistency

    out = []
    worst_chain = worst_pq = 0.0
    for _ in range(10):
        lam = enumerate_partitions(int(rng.integers(1, 5)))
        h = DescendantElement.monomial(lam[int(rng.integers(len(lam)))].parts)
        pts = annulus_points(rng, 6, params)
        worst_chain = max(worst_chain, chain_defect(h, pts[:2], pts[2], pts[3:5], params))
        worst_pq = max(worst_pq, pq_consistency(h, pts[:2], pts[2:4], params).deviation)
    out.append(_check("kink chain equation", worst_chain, max(tol, 1e-12)))
    out.append(_check("breather-kink relation", worst_pq, max(tol, 1e-12)))
    return out


_SUITE_FUNCS: dict[str, Callable] = {
    "oracle": _suite_oracle,
    "residues": _suite_residues,
    "reflection": _suite_reflection,
    "eom": _suite_eom,
    "em": _suite_em,
    "kink": _suite_kink,
}


def cmd_verify(cfg: RunConfig) -> tuple[dict, int]:
    params = cfg.params()
    names = list(_SUITE_FUNCS) if cfg.suite == "all" else [cfg.suite]
    rng = np.random.default_rng(cfg.seed)
    checks = []
    for name in names:
        for c in _SUITE_FUNCS[name](params, rng, cfg.tol):
            checks.append({"suite": name, **c})
    failed = sum(not c["pass"] for c in checks)
    doc = {"command": "verify", "suite": cfg.suite, "seed": cfg.seed, "checks": checks,
           "passed": len(checks) - failed, "failed": failed}
    return doc, 1 if failed else 0


def cmd_reflect(cfg: RunConfig) -> tuple[dict, int]:
    from .reflection import solve_reflection

    if cfg.a is None or cfg.n is None:
        raise UsageError("reflect needs --a and --n (level)")
    sol = solve_reflection(cfg.n, cfg.a, cfg.params(), seed=cfg.seed)
    return {"command": "reflect", "solution": sol.to_json()}, 0


def cmd_constants(cfg: RunConfig) -> tuple[dict, int]:
    from .special_functions import lambda_prime, minimal_r, reflection_const, vev_g

    params = cfg.params()
    consts = []

    def add(name, pair):
        val, err = pair
        consts.append({"name": name, **_cj(val), "err_estimate": float(err)})

    add("lambda_prime", lambda_prime(params, return_error=True))
    if cfg.a is not None:
        add("G_a", vev_g(cfg.a, params, return_error=True))
        add("R_a", (reflection_const(cfg.a, params), 0.0))
    for t in cfg.theta or ():
        add(f"R(theta={complex(t).real:g}{complex(t).imag:+g}i)", minimal_r(t, params, return_error=True))
    return {"command": "constants", "constants": consts}, 0


_COMMANDS = {"eval": cmd_eval, "verify": cmd_verify, "reflect": cmd_reflect, "constants": cmd_constants}


def _emit(doc: dict, cfg: RunConfig | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True)
    if cfg is not None and cfg.json_out:
        with open(cfg.json_out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)


def main(argv: Sequence[str] | None = None) -> int:
    ap = _parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    cfg = None
    try:
        cfg = _config(ns)
        doc, code = _COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        _emit({"schema": SCHEMA, "error": "usage", "message": str(exc)}, cfg)
        return 2
    except (ConvergenceError, FitError) as exc:
        _emit({"schema": SCHEMA, "error": "convergence", "message": str(exc)}, cfg)
        return 3
    except (DomainError, DescffError) as exc:
        _emit({"schema": SCHEMA, "error": type(exc).__name__, "message": str(exc)}, cfg)
        return 2
    doc = {"schema": SCHEMA, "p": cfg.p, "a": cfg.a, "precision": cfg.precision, **doc}
    _emit(doc, cfg)
    return code


if __name__ == "__main__":
    sys.exit(main())
