"""Recompute the frozen reference values in tests/oracle_values.py with mpmath.

Run once; the output is pasted into tests/oracle_values.py.  Nothing here
imports the package, so the values are independent of its implementation.
"""

import mpmath as mp

mp.mp.dps = 40


def inv_p(a, p):
    return mp.findroot(lambda x: mp.gammainc(a, 0, x, regularized=True) - p, a)


def wrapped_entropy(sigma):
    def pdf(t):
        return mp.nsum(lambda k: mp.npdf(t + 2 * mp.pi * k, 0, sigma), [-mp.inf, mp.inf])

    return mp.quad(lambda t: -pdf(t) * mp.log(pdf(t)), [-mp.pi, 0, mp.pi])


def tikhonov_entropy(lam):
    return mp.log(2 * mp.pi * mp.besseli(0, lam)) - lam * mp.besseli(1, lam) / mp.besseli(0, lam)


def ncx2_logpdf(t, dof, nc):
    t, nc = mp.mpf(t), mp.mpf(nc)
    nu = mp.mpf(dof) / 2 - 1
    return mp.log(0.5) - (t + nc) / 2 + (nu / 2) * mp.log(t / nc) + mp.log(mp.besseli(nu, mp.sqrt(nc * t)))


def delta_r(M, eps):
    g = inv_p(M, eps)
    s = -mp.log(1 - mp.power(eps, mp.mpf(1) / M))
    return 0.5 * mp.log(g / s, 2)


values = {
    "LOG_I0": {x: mp.log(mp.besseli(0, x)) for x in (1.0, 100.0, 1e4)},
    "I1_I0": {x: mp.besseli(1, x) / mp.besseli(0, x) for x in (2.0, 1e6)},
    "DIGAMMA": {x: mp.digamma(x) for x in (10.0, 0.5)},
    "Q_PRODUCT": {q: mp.qp(q) for q in (0.5, 0.99)},
    "INV_P": {(a, p): inv_p(a, p) for a, p in ((20, 0.1), (1, 0.1), (5, 0.5))},
    "DELTA_R_EPS01": {M: delta_r(M, 0.1) for M in (2, 5, 20)},
    "TIKHONOV_ENTROPY": {lam: tikhonov_entropy(lam) for lam in (2.0, 5.0, 10.0)},
    "WRAPPED_ENTROPY_DEG": {d: wrapped_entropy(mp.radians(d)) for d in (6.0, 55.0, 120.0)},
    "NCX2_LOGPDF": {(dof, nc, t): ncx2_logpdf(t, dof, nc) for dof, nc, t in
                    ((2, 1.0, 0.5), (8, 100.0, 10.0), (8, 100.0, 100.0), (4, 1e5, 1e5), (16, 400.0, 380.0))},
}

print('"""Reference values frozen from scripts/pin_oracles.py (mpmath, 40 digits)."""')
for name, table in values.items():
    print()
    print(f"{name} = {{")
    for k, v in table.items():
        print(f"    {k!r}: {mp.nstr(v, 17)},")
    print("}")
