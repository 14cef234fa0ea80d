"""Scalar special functions used by the entropy and outage formulas.

Everything here works on Python floats and stays in the log/scaled domain
where overflow is possible (Tikhonov concentrations of a few thousand are
routine for good PLLs).
"""

from __future__ import annotations

import math

__all__ = [
    "SpecialFunctionDomainError",
    "log_bessel_i0",
    "bessel_i1_i0_ratio",
    "digamma",
    "euler_q_product",
    "log_euler_q_product",
    "regularized_gamma_p",
    "inverse_regularized_gamma_p",
]

EULER_GAMMA = 0.57721566490153286061

# power series below this argument, Hankel asymptotic expansion above
_BESSEL_SERIES_MAX = 20.0
_SERIES_REL_TOL = 1e-17
_QPRODUCT_TERM_TOL = 1e-18

# Bernoulli numbers B_2k / (2k) for the digamma asymptotic tail
_DIGAMMA_TAIL = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


class SpecialFunctionDomainError(ValueError):
    """Argument outside the domain where a special function is defined/implemented."""


def _check_finite_nonneg(name: str, x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise SpecialFunctionDomainError(f"{name} must be finite, got {x!r}")
    if x < 0.0:
        raise SpecialFunctionDomainError(f"{name} must be >= 0, got {x!r}")
    return x


def _bessel_series(nu: int, x: float) -> float:
    """I_nu(x) for nu in {0, 1} from the ascending power series."""
    quarter = 0.25 * x * x
    term = 1.0 if nu == 0 else 0.5 * x
    total = term
    k = 0
    while True:
        k += 1
        term *= quarter / (k * (k + nu))
        total += term
        if term < _SERIES_REL_TOL * total or k > 500:
            return total


def _bessel_asymptotic_scaled(nu: int, x: float) -> float:
    """sqrt(2 pi x) e^{-x} I_nu(x) from the large-argument expansion.

    Summation stops at the smallest term, which for x >= 20 is far below
    double precision.
    """
    mu = 4.0 * nu * nu
    term = 1.0
    total = 1.0
    for k in range(1, 60):
        new = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if abs(new) >= abs(term):
            break
        term = new
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
    return total


def log_bessel_i0(lam: float) -> float:
    """Natural log of the modified Bessel function I_0(lam), lam >= 0."""
    lam = _check_finite_nonneg("lambda", lam)
    if lam <= _BESSEL_SERIES_MAX:
        return math.log(_bessel_series(0, lam))
    return lam - 0.5 * math.log(2.0 * math.pi * lam) + math.log(_bessel_asymptotic_scaled(0, lam))


def bessel_i1_i0_ratio(lam: float) -> float:
    """I_1(lam) / I_0(lam); the mean resultant length of a Tikhonov law."""
    lam = _check_finite_nonneg("lambda", lam)
    if lam == 0.0:
        return 0.0
    if lam <= _BESSEL_SERIES_MAX:
        return _bessel_series(1, lam) / _bessel_series(0, lam)
    return _bessel_asymptotic_scaled(1, lam) / _bessel_asymptotic_scaled(0, lam)


def digamma(x: float) -> float:
    """Digamma function psi(x) for x > 0 (recurrence + asymptotic series)."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise SpecialFunctionDomainError(f"digamma needs a finite x > 0, got {x!r}")
    shift = 0.0
    while x < 10.0:
        shift -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    tail = 0.0
    power = inv2
    for coef in _DIGAMMA_TAIL:
        tail += coef * power
        power *= inv2
    return shift + math.log(x) - 0.5 / x - tail


def euler_q_product(q: float) -> float:
    """Euler function prod_{l>=1} (1 - q^l) for 0 <= q < 1.

    The product is truncated once q^l drops below 1e-18.
    """
    return math.exp(log_euler_q_product(q))


def log_euler_q_product(q: float) -> float:
    """Log of :func:`euler_q_product`; stays finite where the product underflows."""
    q = float(q)
    if not math.isfinite(q) or q < 0.0 or q >= 1.0:
        raise SpecialFunctionDomainError(
            f"euler_q_product needs 0 <= q < 1, got {q!r}; use quadrature for q -> 1"
        )
    log_prod = 0.0
    ql = q
    while ql >= _QPRODUCT_TERM_TOL:
        log_prod += math.log1p(-ql)
        ql *= q
    return log_prod


def _gamma_p_series(a: float, x: float) -> float:
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(10_000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_q_contfrac(a: float, x: float) -> float:
    # modified Lentz evaluation of the Legendre continued fraction
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def regularized_gamma_p(a: float, x: float) -> float:
    """Lower regularized incomplete gamma function P(a, x)."""
    a = float(a)
    if not math.isfinite(a) or a <= 0.0:
        raise SpecialFunctionDomainError(f"shape a must be finite and > 0, got {a!r}")
    x = float(x)
    if math.isnan(x) or x < 0.0:
        raise SpecialFunctionDomainError(f"x must be >= 0, got {x!r}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return min(1.0, _gamma_p_series(a, x))
    return max(0.0, 1.0 - _gamma_q_contfrac(a, x))


def inverse_regularized_gamma_p(a: float, p: float) -> float:
    """Solve P(a, x) = p for x (Newton steps guarded by a bisection bracket)."""
    a = float(a)
    if not math.isfinite(a) or a <= 0.0:
        raise SpecialFunctionDomainError(f"shape a must be finite and > 0, got {a!r}")
    p = float(p)
    if not (0.0 < p < 1.0):
        raise SpecialFunctionDomainError(f"probability must lie in (0, 1), got {p!r}")

    lo, hi = 0.0, max(1.0, 2.0 * a)
    while regularized_gamma_p(a, hi) < p:
        lo, hi = hi, 2.0 * hi
    # small-x expansion P(a, x) ~ x^a / Gamma(a + 1) as the starting point
    x = math.exp((math.log(p) + math.lgamma(a + 1.0)) / a)
    if not lo < x < hi:
        x = 0.5 * (lo + hi)
    log_norm = math.lgamma(a)
    for _ in range(400):
        f = regularized_gamma_p(a, x) - p
        if f < 0.0:
            lo = x
        else:
            hi = x
        dens = math.exp((a - 1.0) * math.log(x) - x - log_norm) if x > 0.0 else 0.0
        step_ok = False
        if dens > 0.0:
            cand = x - f / dens
            if lo < cand < hi:
                step_ok = True
        new = cand if step_ok else 0.5 * (lo + hi)
        # relative test: for small shapes the root can be far below 1
        if abs(new - x) <= 1e-15 * x or hi - lo <= 4e-16 * hi:
            x = new
            break
        x = new
    return x
