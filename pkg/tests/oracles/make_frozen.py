"""Independent oracles for the frozen reference values in the tests.

Uses only mpmath and itertools (no descff import): brute-force subset
sums at 40 digits and plain mpmath.quad on absolutely convergent
integrals. Run: python3 tests/oracles/make_frozen.py
"""

import itertools

import mpmath as mp

mp.mp.dps = 40

P = mp.mpf("0.31")
A = mp.mpf("0.13")
X = [mp.mpc("0.83", "0.41"), mp.mpc("-1.12", "0.57"), mp.mpc("0.35", "-1.31"),
     mp.mpc("1.47", "0.22"), mp.mpc("-0.62", "-0.71")]


def f(x, p):
    w = mp.exp(1j * mp.pi * p)
    return (x + w) * (x - 1 / w) / (x * x - 1)


def S(r, pts):
    return mp.fsum(x**r for x in pts)


def P_value(chiral, antichiral, xm, xp):
    out = mp.mpc(1)
    for n in chiral:
        out *= S(n, xm) - (-1) ** n * S(n, xp)
    for n in antichiral:
        out *= S(-n, xp) - (-1) ** n * S(-n, xm)
    return out


def J(chiral, antichiral, a, pts, p):
    rho = mp.exp(1j * mp.pi * a)
    total = mp.mpc(0)
    N = len(pts)
    for signs in itertools.product((0, 1), repeat=N):
        xm = [x for x, s in zip(pts, signs) if s]
        xp = [x for x, s in zip(pts, signs) if not s]
        term = rho ** (len(xm) - len(xp)) * P_value(chiral, antichiral, xm, xp)
        for x in xm:
            for y in xp:
                term *= f(x / y, p)
        total += term
    return total


def vev(a, p, m=1):
    alpha2 = (2 * a + 1) ** 2 / (2 * p * (p + 1))
    c = a + mp.mpf(1) / 2

    def integrand(t):
        return (mp.sinh(t / 2) * mp.sinh(c * t) ** 2 / (mp.sinh(t) * mp.sinh(p * t / 2) * mp.sinh((p + 1) * t / 2))
                - (2 * a + 1) ** 2 / (2 * p * (p + 1)) * mp.exp(-(p + 1) * t)) / t

    pref = (m * mp.gamma((1 + p) / 2) * mp.gamma((2 - p) / 2) / (4 * mp.sqrt(mp.pi))) ** alpha2
    return pref * mp.exp(mp.quad(integrand, [0, 1, 10, mp.inf]))


def minimal_r(theta, p):
    def integrand(t):
        return 4 * mp.sinh(mp.pi * t / 2) * mp.sinh(mp.pi * p * t / 2) * mp.sinh(mp.pi * (p + 1) * t / 2) \
            / mp.sinh(mp.pi * t) ** 2 * mp.cosh((mp.pi - 1j * theta) * t) / t

    return mp.exp(mp.quad(integrand, [0, 1, 10, mp.inf]))


def lambda_prime(p):
    integral = mp.quad(lambda t: t / mp.sin(t), [0, mp.pi * p])
    return (2 * mp.sin(mp.pi * p / 2)) ** mp.mpf(-0.5) * mp.exp(-integral / (2 * mp.pi))


if __name__ == "__main__":
    print("J 1 N=5", mp.nstr(J((), (), A, X, P), 20))
    print("J c-2 N=4", mp.nstr(J((2,), (), A, X[:4], P), 20))
    print("J c-1^2 cbar-2 N=4", mp.nstr(J((1, 1), (2,), A, X[:4], P), 20))
    print("J c-3 cbar-1 N=3", mp.nstr(J((3,), (1,), A, X[:3], P), 20))
    print("G_a a=0.1 p=0.3", mp.nstr(vev(mp.mpf("0.1"), mp.mpf("0.3")), 20))
    print("G_a a=-0.3 p=0.3", mp.nstr(vev(mp.mpf("-0.3"), mp.mpf("0.3")), 20))
    th = mp.mpc("0.4", -mp.pi)
    print("R(0.4 - i pi) p=0.3", mp.nstr(minimal_r(th, mp.mpf("0.3")), 20))
    print("lambda' p=0.3", mp.nstr(lambda_prime(mp.mpf("0.3")), 20))
    print("lambda' p=0.5", mp.nstr(lambda_prime(mp.mpf("0.5")), 20))
