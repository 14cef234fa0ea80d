"""Oscillator phase-noise processes and their entropy rates.

Four processes are modelled:

* :class:`Noncoherent` -- i.i.d. uniform phase, no memory.
* :class:`PartiallyCoherent` -- i.i.d. residual phase error after a tracker.
* :class:`Wiener` -- free-running oscillator, wrapped Gaussian random walk
  started from a uniform phase (hence stationary with uniform marginals).
* :class:`CompositeWiener` -- one transmitter walk shared by all antennas
  plus an independent receiver walk per antenna.

JSON descriptors use degrees for every angular parameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from . import circular
from .circular import (
    LOG_TWO_PI,
    TWO_PI,
    CircularDistribution,
    EntropyEstimate,
    Tikhonov,
    UniformCircular,
    WrappedGaussian,
    wrap,
)


class UnsupportedModelError(ValueError):
    """Operation not defined for the given phase-noise model."""


class Topology(str, Enum):
    CLO = "clo"
    SLO = "slo"


@dataclass(frozen=True)
class Noncoherent:
    pass


@dataclass(frozen=True)
class PartiallyCoherent:
    residual: CircularDistribution


@dataclass(frozen=True)
class Wiener:
    sigma_delta: float  # radians

    def __post_init__(self):
        if not (math.isfinite(self.sigma_delta) and self.sigma_delta > 0.0):
            raise ValueError(f"Wiener innovation std must be finite and > 0, got {self.sigma_delta!r}")

    @property
    def innovation(self) -> WrappedGaussian:
        return WrappedGaussian(self.sigma_delta)


@dataclass(frozen=True)
class CompositeWiener:
    sigma_tx: float  # radians
    sigma_rx: float  # radians

    def __post_init__(self):
        for name in ("sigma_tx", "sigma_rx"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")
        if self.sigma_tx == 0.0 and self.sigma_rx == 0.0:
            raise ValueError("composite Wiener model with both innovations zero is deterministic")

    @property
    def innovation(self) -> WrappedGaussian:
        """Per-antenna marginal innovation (transmitter plus receiver walk)."""
        return WrappedGaussian(math.hypot(self.sigma_tx, self.sigma_rx))


PhaseNoiseModel = Union[Noncoherent, PartiallyCoherent, Wiener, CompositeWiener]


@dataclass(frozen=True)
class PhasePath:
    phases: np.ndarray  # (M, n), radians in [0, 2*pi)

    @property
    def M(self) -> int:
        return self.phases.shape[0]

    @property
    def n(self) -> int:
        return self.phases.shape[1]


def is_memoryless(model: PhaseNoiseModel) -> bool:
    return isinstance(model, (Noncoherent, PartiallyCoherent))


def has_uniform_marginal(model: PhaseNoiseModel) -> bool:
    if isinstance(model, (Noncoherent, Wiener, CompositeWiener)):
        return True
    residual = model.residual
    return isinstance(residual, UniformCircular) or (isinstance(residual, Tikhonov) and residual.lam == 0.0)


def marginal_law(model: PhaseNoiseModel) -> CircularDistribution:
    """Law of a single phase sample theta_{m,k}."""
    if isinstance(model, PartiallyCoherent):
        return model.residual
    return UniformCircular()


def entropy_rate(model: PhaseNoiseModel, method: str = "auto") -> EntropyEstimate:
    """Differential-entropy rate h({theta_k}) of one antenna's phase process, nats.

    ``method`` selects the circular-entropy evaluator for wrapped-Gaussian
    innovations (``auto``/``quadrature``, ``series``, ``gaussian_approx``).
    """
    if isinstance(model, Noncoherent):
        return EntropyEstimate(LOG_TWO_PI, "closed_form")
    if isinstance(model, PartiallyCoherent):
        if method in ("series", "gaussian_approx") and not isinstance(model.residual, WrappedGaussian):
            method = "auto"
        return circular.entropy(model.residual, method)
    if isinstance(model, (Wiener, CompositeWiener)):
        return circular.entropy(model.innovation, method)
    raise TypeError(f"not a phase-noise model: {model!r}")


def past_mutual_information(model: PhaseNoiseModel, method: str = "auto") -> float:
    """I(theta_0; theta_{-inf}^{-1}) for one antenna's process, nats."""
    if is_memoryless(model):
        return 0.0
    if isinstance(model, Wiener):
        # the uniform marginal minus the Markov conditional entropy; clipped at 0
        # because the quadrature reproduces ln(2*pi) only to ~1e-15 for huge sigma
        return max(0.0, LOG_TWO_PI - entropy_rate(model, method).value)
    raise UnsupportedModelError(
        "past mutual information is not defined here for the composite transmitter/receiver model"
    )


def sample_path(
    model: PhaseNoiseModel,
    topology: Topology | str,
    M: int,
    n: int,
    rng: np.random.Generator,
) -> PhasePath:
    """Draw an (M, n) phase-noise realisation.

    Under CLO a single scalar path is replicated on every row.  Wiener paths
    start from a uniform phase and accumulate wrapped-normal increments.
    """
    topology = Topology(topology)
    if M < 1 or n < 1:
        raise ValueError("M and n must be >= 1")
    rows = 1 if topology is Topology.CLO else M

    if isinstance(model, Noncoherent):
        phases = rng.uniform(0.0, TWO_PI, (rows, n))
    elif isinstance(model, PartiallyCoherent):
        phases = np.asarray(model.residual.sample(rng, (rows, n)))
    elif isinstance(model, Wiener):
        phases = _wiener_rows(rng, rows, n, model.sigma_delta)
    elif isinstance(model, CompositeWiener):
        tx = _wiener_rows(rng, 1, n, model.sigma_tx) if model.sigma_tx > 0 else np.zeros((1, n))
        if topology is Topology.CLO:
            rx = _wiener_rows(rng, 1, n, model.sigma_rx) if model.sigma_rx > 0 else np.zeros((1, n))
        else:
            rx = _wiener_rows(rng, M, n, model.sigma_rx) if model.sigma_rx > 0 else np.zeros((M, n))
        phases = tx + rx
    else:
        raise TypeError(f"not a phase-noise model: {model!r}")

    phases = wrap(phases)
    if rows == 1 and M > 1:
        phases = np.repeat(phases, M, axis=0)
    return PhasePath(np.ascontiguousarray(phases))


def _wiener_rows(rng: np.random.Generator, rows: int, n: int, sigma: float) -> np.ndarray:
    start = rng.uniform(0.0, TWO_PI, (rows, 1))
    steps = rng.normal(0.0, sigma, (rows, n - 1))
    return np.concatenate([start, start + np.cumsum(steps, axis=1)], axis=1)


# --- JSON descriptors (degrees at the boundary) -------------------------------


def circular_from_dict(d: dict) -> CircularDistribution:
    kind = d["kind"]
    if kind == "uniform":
        return UniformCircular()
    if kind == "wrapped_gaussian":
        return WrappedGaussian(math.radians(float(d["sigma_deg"])))
    if kind == "tikhonov":
        return Tikhonov(float(d["lambda"]))
    raise ValueError(f"unknown circular law {kind!r}")


def circular_to_dict(dist: CircularDistribution) -> dict:
    if isinstance(dist, UniformCircular):
        return {"kind": "uniform"}
    if isinstance(dist, WrappedGaussian):
        return {"kind": "wrapped_gaussian", "sigma_deg": math.degrees(dist.sigma)}
    return {"kind": "tikhonov", "lambda": dist.lam}


def model_from_dict(d: dict) -> PhaseNoiseModel:
    kind = d["kind"]
    if kind == "noncoherent":
        return Noncoherent()
    if kind == "partially_coherent":
        return PartiallyCoherent(circular_from_dict(d["residual"]))
    if kind == "tikhonov":
        # shorthand for a PLL residual with Tikhonov statistics
        return PartiallyCoherent(Tikhonov(float(d["lambda"])))
    if kind == "wiener":
        return Wiener(math.radians(float(d["sigma_deg"])))
    if kind == "composite_wiener":
        return CompositeWiener(math.radians(float(d["sigma_tx_deg"])), math.radians(float(d["sigma_rx_deg"])))
    raise ValueError(f"unknown phase-noise model {kind!r}")


def model_to_dict(model: PhaseNoiseModel) -> dict:
    if isinstance(model, Noncoherent):
        return {"kind": "noncoherent"}
    if isinstance(model, PartiallyCoherent):
        return {"kind": "partially_coherent", "residual": circular_to_dict(model.residual)}
    if isinstance(model, Wiener):
        return {"kind": "wiener", "sigma_deg": math.degrees(model.sigma_delta)}
    return {
        "kind": "composite_wiener",
        "sigma_tx_deg": math.degrees(model.sigma_tx),
        "sigma_rx_deg": math.degrees(model.sigma_rx),
    }
