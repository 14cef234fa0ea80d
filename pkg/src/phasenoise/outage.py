"""Outage analysis of the high-SNR rate under quasi-static Rayleigh fading.

For every fading draw h ~ CN(0, I_M) the supported rate is taken to be
``0.5*ln(rho) + chi(h)``, i.e. the high-SNR formula evaluated per draw (no
symbol-level simulation).  ``chi(h)`` depends on h only through ``||h||^2``
(coherent scenarios) or ``max_m |h_m|^2`` (antenna selection), which gives
closed-form Gamma / max-of-exponentials oracles for the Monte Carlo curves.
Rates are reported in bits per channel use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .capacity import LN2, Direction, EstimatorConfig, SnrSpec, observation_entropy
from .circular import LOG_TWO_PI
from .models import (
    Noncoherent,
    PartiallyCoherent,
    PhaseNoiseModel,
    Topology,
    Wiener,
    entropy_rate,
    has_uniform_marginal,
)
from .streams import concat, run_chunked

Z95 = 1.959963984540054


class BoundedChiError(ValueError):
    """The scenario's chi is only bounded; an outage curve would mix in bound looseness."""


@dataclass(frozen=True)
class OutageTemplate:
    """Scenario whose gains are redrawn per codeword."""

    direction: Direction
    topology: Topology
    M: int
    model: PhaseNoiseModel

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        object.__setattr__(self, "topology", Topology(self.topology))
        if self.M < 1:
            raise ValueError("M must be >= 1")


@dataclass(frozen=True)
class OutageCurve:
    rate_grid: np.ndarray  # bits per channel use, ascending
    probabilities: np.ndarray
    n_samples: int
    ci_halfwidth: np.ndarray  # 95 %, normal approximation


@dataclass(frozen=True)
class OutageQuantile:
    rate: float  # bits per channel use
    ci_halfwidth: float


@dataclass(frozen=True)
class GapRow:
    M: int
    delta_r_analytic: float  # bits
    delta_r_mc: float
    ci: float
    delta_r_mc_alt: float  # same gap at the second phase-noise level
    ci_alt: float


def chi_structure(template: OutageTemplate, entropy_method: str = "auto",
                  estimator: EstimatorConfig = EstimatorConfig()) -> tuple[str, float]:
    """(gain statistic, constant) such that chi(h) = 0.5 ln(G(h)/2) + constant.

    G is ``norm2`` or ``max`` (strongest antenna).  Refuses scenarios whose
    chi is only known through bounds.
    """
    model = template.model
    if template.topology is Topology.CLO or template.M == 1:
        return "norm2", LOG_TWO_PI - entropy_rate(model, entropy_method).value
    if template.direction is Direction.DOWNLINK:
        if has_uniform_marginal(model) and isinstance(model, (Noncoherent, PartiallyCoherent, Wiener)):
            return "max", LOG_TWO_PI - entropy_rate(model, entropy_method).value
        raise BoundedChiError("downlink SLO without uniform marginals has only chi bounds")
    if isinstance(model, Noncoherent) or (isinstance(model, PartiallyCoherent) and has_uniform_marginal(model)):
        return "norm2", 0.0
    if isinstance(model, PartiallyCoherent):
        est = observation_entropy([model.residual] * template.M, estimator)
        return "norm2", LOG_TWO_PI - est.value
    raise BoundedChiError("uplink SLO with memory has only chi bounds")


def draw_gains(M: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """(n, M) i.i.d. CN(0, 1) gains."""
    return (rng.standard_normal((n, M)) + 1j * rng.standard_normal((n, M))) / math.sqrt(2.0)


def outage_rates_mc(
    template: OutageTemplate,
    snr: SnrSpec,
    n_samples: int,
    seed: int = 0,
    *,
    workers: int = 1,
    entropy_method: str = "auto",
    stream: str = "fading",
) -> np.ndarray:
    """Per-draw high-SNR rates in bits, in draw order."""
    stat, const = chi_structure(template, entropy_method)
    offset = 0.5 * math.log(snr.rho) + const

    def one_chunk(size: int, rng: np.random.Generator) -> np.ndarray:
        power = np.abs(draw_gains(template.M, size, rng)) ** 2
        g = power.sum(axis=1) if stat == "norm2" else power.max(axis=1)
        return (0.5 * np.log(g / 2.0) + offset) / LN2

    return concat(run_chunked(one_chunk, n_samples, seed, stream, workers=workers))


def _empirical_cdf(rates: np.ndarray, rate_grid: np.ndarray) -> np.ndarray:
    return np.searchsorted(np.sort(rates), rate_grid, side="right") / rates.size


def outage_cdf_mc(
    template: OutageTemplate,
    snr: SnrSpec,
    rate_grid,
    n_samples: int,
    seed: int = 0,
    *,
    workers: int = 1,
    entropy_method: str = "auto",
) -> OutageCurve:
    """Empirical Pr{0.5 ln(rho) + chi(h) <= R} on ``rate_grid`` (bits)."""
    grid = np.asarray(rate_grid, dtype=float)
    if np.any(np.diff(grid) < 0):
        raise ValueError("rate grid must be ascending")
    rates = outage_rates_mc(template, snr, n_samples, seed, workers=workers, entropy_method=entropy_method)
    p = _empirical_cdf(rates, grid)
    ci = Z95 * np.sqrt(p * (1.0 - p) / n_samples)
    return OutageCurve(grid, p, n_samples, ci)


def outage_cdf_analytic(template: OutageTemplate, snr: SnrSpec, rate_grid, entropy_method: str = "auto") -> np.ndarray:
    """Closed-form counterpart of :func:`outage_cdf_mc`."""
    stat, const = chi_structure(template, entropy_method)
    r = np.asarray(rate_grid, dtype=float)
    g = 2.0 * np.exp(2.0 * (r * LN2 - 0.5 * math.log(snr.rho) - const))
    if stat == "norm2":
        return np.array([specfun.regularized_gamma_p(template.M, v) for v in g])
    return (-np.expm1(-g)) ** template.M


def quantile_with_ci(rates: np.ndarray, epsilon: float) -> OutageQuantile:
    """epsilon-quantile with a distribution-free 95 % order-statistic interval."""
    x = np.sort(rates)
    n = x.size
    q = float(np.quantile(x, epsilon, method="inverted_cdf"))
    spread = Z95 * math.sqrt(n * epsilon * (1.0 - epsilon))
    lo = max(int(math.floor(n * epsilon - spread)), 0)
    hi = min(int(math.ceil(n * epsilon + spread)), n - 1)
    return OutageQuantile(q, 0.5 * float(x[hi] - x[lo]))


def outage_quantile_mc(
    template: OutageTemplate,
    snr: SnrSpec,
    epsilon: float,
    n_samples: int,
    seed: int = 0,
    **kwargs,
) -> OutageQuantile:
    """Rate R (bits) with Pr{0.5 ln(rho) + chi(h) <= R} = epsilon."""
    return quantile_with_ci(outage_rates_mc(template, snr, n_samples, seed, **kwargs), epsilon)


def _check_epsilon(epsilon: float) -> None:
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"outage probability must lie in (0, 1), got {epsilon!r}")


def outage_rate_analytic(topology: Topology | str, M: int, epsilon: float) -> float:
    """Outage rate at epsilon minus 0.5 log2(rho) and the model constant, in bits.

    CLO: ||h||^2 ~ Gamma(M, 1); SLO: max_m |h_m|^2 has CDF (1 - e^-x)^M.
    """
    _check_epsilon(epsilon)
    topology = Topology(topology)
    if topology is Topology.CLO or M == 1:
        g = specfun.inverse_regularized_gamma_p(M, epsilon)
    else:
        g = -math.log1p(-epsilon ** (1.0 / M))
    return 0.5 * math.log2(g / 2.0)


def delta_r_analytic(M: int, epsilon: float) -> float:
    """CLO minus SLO downlink outage rate at epsilon (bits); independent of rho and sigma."""
    return outage_rate_analytic(Topology.CLO, M, epsilon) - outage_rate_analytic(Topology.SLO, M, epsilon)


def delta_r_mc(
    M: int,
    epsilon: float,
    model: PhaseNoiseModel,
    snr: SnrSpec,
    n_samples: int,
    seed: int = 0,
    *,
    stream: str = "gap",
    workers: int = 1,
) -> OutageQuantile:
    """Monte Carlo downlink CLO-minus-SLO gap; CI is the sum of the two quantile CIs."""
    clo = outage_quantile_mc(
        OutageTemplate(Direction.DOWNLINK, Topology.CLO, M, model), snr, epsilon, n_samples, seed,
        workers=workers, stream=f"{stream}-clo",
    )
    slo = outage_quantile_mc(
        OutageTemplate(Direction.DOWNLINK, Topology.SLO, M, model), snr, epsilon, n_samples, seed,
        workers=workers, stream=f"{stream}-slo",
    )
    return OutageQuantile(clo.rate - slo.rate, clo.ci_halfwidth + slo.ci_halfwidth)


def gap_vs_M(
    epsilon: float,
    M_list,
    *,
    sigmas_deg: tuple[float, float] = (6.0, 2.0),
    snr: SnrSpec = SnrSpec.from_db(20.0),
    n_samples: int = 200_000,
    seed: int = 0,
    workers: int = 1,
) -> list[GapRow]:
    """Analytic gap plus Monte Carlo confirmation at two Wiener noise levels."""
    _check_epsilon(epsilon)
    rows = []
    for M in M_list:
        first = delta_r_mc(M, epsilon, Wiener(math.radians(sigmas_deg[0])), snr, n_samples, seed,
                           stream=f"gap-a-{M}", workers=workers)
        second = delta_r_mc(M, epsilon, Wiener(math.radians(sigmas_deg[1])), snr, n_samples, seed,
                            stream=f"gap-b-{M}", workers=workers)
        rows.append(GapRow(int(M), delta_r_analytic(M, epsilon), first.rate, first.ci_halfwidth,
                           second.rate, second.ci_halfwidth))
    return rows
