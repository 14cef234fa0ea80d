"""Phase-noise numbers and the high-SNR capacity approximation.

All four scenarios share the prelog 1/2, so the capacity at high SNR is
``0.5*ln(rho) + chi``.  The functions here return the second-order term
``chi`` (nats) either exactly or as a lower/upper pair:

============  ===========================  ==========================
scenario      function                     kind
============  ===========================  ==========================
SISO          :func:`pnn_siso`             exact
UL, CLO       :func:`pnn_ul_clo`           exact (MRC)
UL, SLO       :func:`pnn_ul_slo`           bounds; exact if memoryless
UL, SLO, TX   :func:`pnn_ul_slo_composite` lower bound only
DL, CLO       :func:`pnn_dl_clo`           exact (MRT)
DL, any       :func:`pnn_dl_bounds`        bounds
DL, SLO       :func:`pnn_dl_slo_uniform`   exact (antenna selection)
============  ===========================  ==========================

SNR convention: the noise variance is 2 and the power constraint is
``E|x|^2 <= 2*rho``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from . import circular
from .circular import (
    LOG_TWO_PI,
    TWO_PI,
    UNWRAPPED_EXACT_SIGMA,
    EntropyEstimate,
    WrappedGaussian,
    conditional_phase_entropy,
    gaussian_entropy,
)
from .models import (
    CompositeWiener,
    Noncoherent,
    PartiallyCoherent,
    PhaseNoiseModel,
    Topology,
    UnsupportedModelError,
    Wiener,
    entropy_rate,
    has_uniform_marginal,
    model_from_dict,
    model_to_dict,
    past_mutual_information,
)

LN2 = math.log(2.0)
PRELOG = 0.5
MAX_POSTERIOR_NODES = 8192


class SpecMismatchError(ValueError):
    """Channel spec does not match the scenario a formula was derived for."""


class Direction(str, Enum):
    UPLINK = "uplink"
    DOWNLINK = "downlink"


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    direction: Direction
    topology: Topology
    h: np.ndarray
    model: PhaseNoiseModel

    def __post_init__(self):
        h = np.atleast_1d(np.asarray(self.h, dtype=complex))
        if h.ndim != 1 or h.size < 1:
            raise ValueError("h must be a nonempty vector")
        if not np.all(np.isfinite(h)):
            raise ValueError("h must be finite")
        if not np.any(h != 0):
            raise ValueError("h must have positive norm")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "direction", Direction(self.direction))
        object.__setattr__(self, "topology", Topology(self.topology))

    @property
    def M(self) -> int:
        return self.h.size

    @property
    def norm2(self) -> float:
        return float(np.sum(np.abs(self.h) ** 2))

    @property
    def max_gain2(self) -> float:
        return float(np.max(np.abs(self.h) ** 2))

    def to_dict(self) -> dict:
        return {
            "direction": self.direction.value,
            "topology": self.topology.value,
            "h": [[float(z.real), float(z.imag)] for z in self.h],
            "model": model_to_dict(self.model),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelSpec":
        return cls(d["direction"], d["topology"], parse_gains(d["h"]), model_from_dict(d["model"]))


def parse_gains(values) -> np.ndarray:
    """Gains from JSON: numbers, ``[re, im]`` pairs or ``{"re":..,"im":..}``."""
    out = []
    for v in values:
        if isinstance(v, dict):
            out.append(complex(float(v.get("re", 0.0)), float(v.get("im", 0.0))))
        elif isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise ValueError(f"complex gain must be [re, im], got {v!r}")
            out.append(complex(float(v[0]), float(v[1])))
        else:
            out.append(complex(float(v)))
    return np.asarray(out, dtype=complex)


@dataclass(frozen=True)
class SnrSpec:
    rho: float  # linear; noise variance 2, E|x|^2 <= 2*rho

    def __post_init__(self):
        if not (math.isfinite(self.rho) and self.rho > 0.0):
            raise ValueError(f"rho must be finite and > 0, got {self.rho!r}")

    @classmethod
    def from_db(cls, snr_db: float) -> "SnrSpec":
        return cls(10.0 ** (snr_db / 10.0))


@dataclass(frozen=True)
class EstimatorConfig:
    """Monte Carlo settings for conditional phase entropies."""

    n_samples: int = 20_000
    quadrature_nodes: int = 512
    seed: int = 0
    workers: int = 1


def observation_entropy(laws, estimator: EstimatorConfig = EstimatorConfig()) -> EntropyEstimate:
    """h(phi | {phi + theta_m}) for independent theta_m ~ laws, nats.

    Narrow wrapped-Gaussian laws (sigma below 0.1 rad) leave a Gaussian
    posterior whose entropy is exact in closed form; otherwise Monte Carlo
    with enough quadrature nodes to resolve the posterior.
    """
    laws = list(laws)
    if all(isinstance(l, WrappedGaussian) and l.sigma < UNWRAPPED_EXACT_SIGMA for l in laws):
        precision = sum(l.sigma**-2 for l in laws)
        return EntropyEstimate(gaussian_entropy(precision**-0.5), "unwrapped_limit")
    inv_var = sum(0.0 if math.isinf(l.width) else l.width**-2 for l in laws)
    nodes = estimator.quadrature_nodes
    while inv_var > 0.0 and nodes < MAX_POSTERIOR_NODES and inv_var**-0.5 < 4.0 * TWO_PI / nodes:
        nodes *= 2
    return conditional_phase_entropy(laws, estimator.n_samples, nodes, estimator.seed, workers=estimator.workers)


@dataclass(frozen=True)
class PhaseNoiseNumberResult:
    chi_lower: float
    chi_upper: Optional[float]
    chi_exact: Optional[float] = None
    formula_tags: tuple[str, ...] = ()
    std_error: float = 0.0
    prelog: float = PRELOG

    def __post_init__(self):
        tol = 1e-9
        if self.chi_upper is not None and self.chi_lower > self.chi_upper + tol:
            raise AssertionError(f"bound ordering violated: {self.chi_lower} > {self.chi_upper}")
        if self.chi_exact is not None:
            if self.chi_exact < self.chi_lower - tol:
                raise AssertionError("exact value below lower bound")
            if self.chi_upper is not None and self.chi_exact > self.chi_upper + tol:
                raise AssertionError("exact value above upper bound")

    @classmethod
    def exact(cls, chi: float, *tags: str, std_error: float = 0.0) -> "PhaseNoiseNumberResult":
        return cls(chi, chi, chi, tuple(tags), std_error)

    def to_dict(self, decimals: int = 12) -> dict:
        def bits(v):
            return None if v is None else round(v / LN2, decimals) + 0.0

        return {
            "prelog": self.prelog,
            "chi_lower_bits": bits(self.chi_lower),
            "chi_upper_bits": bits(self.chi_upper),
            "chi_exact_bits": bits(self.chi_exact),
            "std_error_bits": bits(self.std_error),
            "formula_tags": list(self.formula_tags),
        }


@dataclass(frozen=True)
class RateInterval:
    lower: float  # nats per channel use
    upper: Optional[float]

    @property
    def is_exact(self) -> bool:
        return self.upper is not None and self.upper == self.lower


def _gain_term(gain2: float) -> float:
    return 0.5 * math.log(gain2 / 2.0)


def _entropy_tag(est) -> str:
    return f"entropy:{est.method}"


def _require(spec: ChannelSpec, direction: Direction | None, topology: Topology | None, name: str) -> None:
    if direction is not None and spec.direction is not direction:
        raise SpecMismatchError(f"{name} needs direction={direction.value}, got {spec.direction.value}")
    if topology is not None and spec.topology is not topology:
        raise SpecMismatchError(f"{name} needs topology={topology.value}, got {spec.topology.value}")


def pnn_siso(h: complex, model: PhaseNoiseModel, entropy_method: str = "auto") -> PhaseNoiseNumberResult:
    """chi = 0.5 ln(|h|^2/2) + ln(2 pi) - h({theta_k})."""
    gain2 = abs(complex(h)) ** 2
    if gain2 <= 0.0:
        raise ValueError("|h| must be positive")
    rate = entropy_rate(model, entropy_method)
    return PhaseNoiseNumberResult.exact(
        _gain_term(gain2) + LOG_TWO_PI - rate.value, "siso", _entropy_tag(rate)
    )


def _coherent_gain_pnn(spec: ChannelSpec, tag: str, entropy_method: str) -> PhaseNoiseNumberResult:
    if isinstance(spec.model, CompositeWiener) and spec.topology is Topology.SLO:
        raise SpecMismatchError("composite model under SLO is handled by pnn_ul_slo_composite")
    rate = entropy_rate(spec.model, entropy_method)
    return PhaseNoiseNumberResult.exact(
        _gain_term(spec.norm2) + LOG_TWO_PI - rate.value, tag, _entropy_tag(rate)
    )


def pnn_ul_clo(spec: ChannelSpec, entropy_method: str = "auto") -> PhaseNoiseNumberResult:
    """Uplink, common oscillator: MRC turns the array into a SISO link with gain ||h||."""
    _require(spec, Direction.UPLINK, Topology.CLO, "pnn_ul_clo")
    return _coherent_gain_pnn(spec, "ul_clo:mrc", entropy_method)


def pnn_dl_clo(spec: ChannelSpec, entropy_method: str = "auto") -> PhaseNoiseNumberResult:
    """Downlink, common oscillator: conjugate beamforming yields gain ||h||."""
    _require(spec, Direction.DOWNLINK, Topology.CLO, "pnn_dl_clo")
    return _coherent_gain_pnn(spec, "dl_clo:mrt", entropy_method)


def ul_bounds(
    spec: ChannelSpec,
    *,
    lower: str = "innovation_mc",
    entropy_method: str = "auto",
    estimator: EstimatorConfig = EstimatorConfig(),
) -> PhaseNoiseNumberResult:
    """Uplink lower/upper bounds on chi valid for any inter-antenna dependence.

    Under CLO the M observations of the phase coincide and the bounds are
    evaluated with a single observation; they then collapse to the
    common-oscillator value.

    ``lower`` picks the evaluation of the lower bound for Wiener noise:

    ``innovation_mc``
        h(phi | {phi + Delta_m}) with the one-step innovations, which equals
        the bound's conditional entropy by the Markov property; evaluated by
        :func:`observation_entropy` (Monte Carlo, or closed form for narrow
        innovations).
        The information estimate is kept within [I_1, M*I_1], where I_1 is
        the single-antenna information.
    ``chain``
        the averaged-innovation relaxation, ln(2 pi) - h(mean_m Delta_m);
        with ``entropy_method="gaussian_approx"`` this is
        ``0.5*ln(2*pi*e*sigma^2/M)``.  Only meaningful while the innovations
        rarely wrap (sigma well below ~60 degrees).
    """
    _require(spec, Direction.UPLINK, None, "ul_bounds")
    model = spec.model
    if isinstance(model, CompositeWiener):
        raise SpecMismatchError("use pnn_ul_slo_composite for the composite transmitter/receiver model")
    n_obs = 1 if spec.topology is Topology.CLO else spec.M
    base = _gain_term(spec.norm2) + LOG_TWO_PI
    tags = [f"ul_bounds:{spec.topology.value}", f"n_obs:{n_obs}"]

    if isinstance(model, Noncoherent):
        # observations are uniform and independent of phi
        return PhaseNoiseNumberResult.exact(_gain_term(spec.norm2), *tags, "noncoherent:closed_form")

    if isinstance(model, PartiallyCoherent):
        if has_uniform_marginal(model):
            return PhaseNoiseNumberResult.exact(_gain_term(spec.norm2), *tags, "uniform_residual:closed_form")
        if n_obs == 1:
            est = entropy_rate(model, entropy_method)
            return PhaseNoiseNumberResult.exact(base - est.value, *tags, "memoryless:identity", _entropy_tag(est))
        est = observation_entropy([model.residual] * n_obs, estimator)
        # lower and upper bound terms coincide for memoryless noise
        return PhaseNoiseNumberResult.exact(
            base - est.value, *tags, "memoryless:bounds_match", _entropy_tag(est), std_error=est.std_error
        )

    if not isinstance(model, Wiener):
        raise TypeError(f"unsupported model {model!r}")

    rate = entropy_rate(model, entropy_method)
    info_one = max(0.0, LOG_TWO_PI - rate.value)
    # theta_0 has uniform marginals, so h(phi | theta_0 + phi) = ln(2 pi)
    upper = _gain_term(spec.norm2) + n_obs * past_mutual_information(model, entropy_method)
    tags.append(_entropy_tag(rate))
    if n_obs == 1:
        chi = base - rate.value
        return PhaseNoiseNumberResult.exact(chi, *tags, "wiener:single_observation")

    if lower == "chain":
        avg = WrappedGaussian(model.sigma_delta / math.sqrt(n_obs))
        h_avg = circular.entropy(avg, entropy_method)
        chi_lower = base - h_avg.value
        tags += ["wiener_lower:chain_mean_innovation", f"chain_entropy:{h_avg.method}"]
        if chi_lower > upper:
            raise ValueError(
                "averaged-innovation chain exceeds the upper bound: innovations wrap too often "
                f"(sigma={math.degrees(model.sigma_delta):.1f} deg); use lower='innovation_mc'"
            )
        return PhaseNoiseNumberResult(chi_lower, upper, None, tuple(tags + ["wiener_upper:uniform_marginal"]))
    if lower != "innovation_mc":
        raise ValueError(f"unknown lower-bound evaluator {lower!r}")

    est = observation_entropy([model.innovation] * n_obs, estimator)
    info = min(max(LOG_TWO_PI - est.value, info_one), n_obs * info_one)
    tags += ["wiener_lower:innovation_posterior", _entropy_tag(est), "wiener_upper:uniform_marginal"]
    return PhaseNoiseNumberResult(
        _gain_term(spec.norm2) + info, upper, None, tuple(tags), std_error=est.std_error
    )


def pnn_ul_slo(spec: ChannelSpec, **kwargs) -> PhaseNoiseNumberResult:
    """Uplink, separate oscillators.  See :func:`ul_bounds` for the options."""
    _require(spec, Direction.UPLINK, Topology.SLO, "pnn_ul_slo")
    if isinstance(spec.model, CompositeWiener):
        return pnn_ul_slo_composite(spec, kwargs.get("entropy_method", "auto"))
    return ul_bounds(spec, **kwargs)


def pnn_ul_slo_composite(spec: ChannelSpec, entropy_method: str = "auto") -> PhaseNoiseNumberResult:
    """Lower bound for a shared transmitter walk plus M receiver walks.

    The effective innovation variance is ``sigma_tx^2 + sigma_rx^2 / M``.
    """
    _require(spec, Direction.UPLINK, Topology.SLO, "pnn_ul_slo_composite")
    model = spec.model
    if not isinstance(model, CompositeWiener):
        raise SpecMismatchError("pnn_ul_slo_composite needs a CompositeWiener model")
    sigma_eff = math.sqrt(model.sigma_tx**2 + model.sigma_rx**2 / spec.M)
    if entropy_method == "gaussian_approx":
        h_eff = gaussian_entropy(sigma_eff)
        method = "gaussian_approx"
    else:
        est = circular.entropy(WrappedGaussian(sigma_eff), entropy_method)
        h_eff, method = est.value, est.method
    chi = _gain_term(spec.norm2) + LOG_TWO_PI - h_eff
    return PhaseNoiseNumberResult(chi, None, None, ("ul_slo_composite:chain", f"entropy:{method}"))


def pnn_dl_bounds(spec: ChannelSpec, entropy_method: str = "auto") -> PhaseNoiseNumberResult:
    """Downlink bounds: antenna selection below, coherent/selection gain above."""
    _require(spec, Direction.DOWNLINK, None, "pnn_dl_bounds")
    model = spec.model
    if isinstance(model, CompositeWiener):
        raise UnsupportedModelError("the composite model is only defined for the uplink")
    rate = entropy_rate(model, entropy_method)
    lower = _gain_term(spec.max_gain2) + LOG_TWO_PI - rate.value
    tags = ["dl_lower:antenna_selection", _entropy_tag(rate)]
    if spec.topology is Topology.CLO:
        upper = _gain_term(spec.norm2) + LOG_TWO_PI - rate.value
        return PhaseNoiseNumberResult(lower, upper, upper, tuple(tags + ["dl_upper:clo_reduction"]))
    if has_uniform_marginal(model):
        # sup E|h^T Theta x|^2 = max |h_m|^2 for independent uniform phases
        return PhaseNoiseNumberResult(lower, lower, lower, tuple(tags + ["dl_upper:uniform_marginals"]))
    return PhaseNoiseNumberResult(lower, None, None, tuple(tags + ["dl_upper:sup_inf_not_tight"]))


def pnn_dl_slo_uniform(spec: ChannelSpec, entropy_method: str = "auto") -> PhaseNoiseNumberResult:
    """Downlink, separate oscillators with uniform marginals: antenna selection is optimal."""
    _require(spec, Direction.DOWNLINK, Topology.SLO, "pnn_dl_slo_uniform")
    if isinstance(spec.model, CompositeWiener) or not has_uniform_marginal(spec.model):
        raise SpecMismatchError("pnn_dl_slo_uniform needs i.i.d. phase processes with uniform marginals")
    rate = entropy_rate(spec.model, entropy_method)
    chi = _gain_term(spec.max_gain2) + LOG_TWO_PI - rate.value
    return PhaseNoiseNumberResult.exact(chi, "dl_slo:antenna_selection", f"select:{antenna_index(spec.h)}", _entropy_tag(rate))


def antenna_index(h) -> int:
    """Index of the strongest antenna; ties go to the lowest index."""
    return int(np.argmax(np.abs(np.asarray(h))))


def phase_noise_number(spec: ChannelSpec, **kwargs) -> PhaseNoiseNumberResult:
    """Dispatch to the formula for the ChannelSpec scenario."""
    if spec.direction is Direction.UPLINK:
        if spec.topology is Topology.CLO:
            return pnn_ul_clo(spec, kwargs.get("entropy_method", "auto"))
        return pnn_ul_slo(spec, **kwargs)
    if spec.topology is Topology.CLO:
        return pnn_dl_clo(spec, kwargs.get("entropy_method", "auto"))
    return pnn_dl_bounds(spec, kwargs.get("entropy_method", "auto"))


def capacity_highsnr(
    spec_or_result: ChannelSpec | PhaseNoiseNumberResult, snr: SnrSpec, **kwargs
) -> RateInterval:
    """0.5*ln(rho) + chi as an interval (nats per channel use)."""
    res = spec_or_result
    if isinstance(res, ChannelSpec):
        res = phase_noise_number(res, **kwargs)
    first = PRELOG * math.log(snr.rho)
    if res.chi_exact is not None:
        v = first + res.chi_exact
        return RateInterval(v, v)
    return RateInterval(first + res.chi_lower, None if res.chi_upper is None else first + res.chi_upper)
