"""Acceptance criteria 1-8, each at its stated tolerance.

Every test carries a ``criterion`` marker; ``conftest.py`` prints one
pass/fail line per criterion at the end of the run.
"""

import io
import math
import time

import numpy as np
import pytest

from phasenoise import cli
from phasenoise.capacity import (
    ChannelSpec,
    Direction,
    EstimatorConfig,
    SnrSpec,
    observation_entropy,
    phase_noise_number,
    pnn_dl_bounds,
    pnn_dl_clo,
    pnn_ul_clo,
    pnn_ul_slo,
    ul_bounds,
)
from phasenoise.channel import distributional_suite, rate_lb_noncoherent_mc, validate_input_power
from phasenoise.circular import Tikhonov, UniformCircular, WrappedGaussian, entropy, gaussian_entropy
from phasenoise.models import CompositeWiener, Noncoherent, PartiallyCoherent, Topology, Wiener
from phasenoise.outage import OutageTemplate, delta_r_analytic, gap_vs_M, outage_quantile_mc
from phasenoise.streams import substream

LN2 = math.log(2.0)


def detail(record, text):
    record("detail", text)


# --- 1 ---------------------------------------------------------------------------


@pytest.mark.criterion(1, "wrapped vs unwrapped Gaussian entropy")
def test_c1_entropy_curve(record_property):
    start = time.perf_counter()
    low = np.arange(2.0, 55.0 + 1e-9, 0.25)
    high = np.arange(80.0, 180.0 + 1e-9, 1.0)

    def diff_bits(deg):
        s = math.radians(deg)
        return abs(entropy(WrappedGaussian(s), "quadrature").value - gaussian_entropy(s)) / LN2

    worst_low = max(diff_bits(d) for d in low)
    best_high = max(diff_bits(d) for d in high)
    elapsed = time.perf_counter() - start
    detail(record_property, f"max diff 2-55 deg = {worst_low:.5f} bit, max diff >80 deg = {best_high:.3f} bit, {elapsed:.3f} s")
    assert worst_low <= 0.01
    assert best_high > 0.02
    assert elapsed < 1.0


# --- 2 ---------------------------------------------------------------------------


@pytest.mark.criterion(2, "outage gap at M=20 and matched SLO noise level")
def test_c2_outage_anchor(record_property):
    start = time.perf_counter()
    snr = SnrSpec.from_db(20.0)
    n = 1_000_000
    six, matched = Wiener(math.radians(6.0)), Wiener(math.radians(2.34))
    clo = outage_quantile_mc(OutageTemplate("downlink", "clo", 20, six), snr, 0.1, n, seed=2024, stream="c2-clo")
    slo = outage_quantile_mc(OutageTemplate("downlink", "slo", 20, six), snr, 0.1, n, seed=2024, stream="c2-slo")
    slo_m = outage_quantile_mc(OutageTemplate("downlink", "slo", 20, matched), snr, 0.1, n, seed=2024, stream="c2-slo-m")
    elapsed = time.perf_counter() - start
    gap = clo.rate - slo.rate
    match = slo_m.rate - clo.rate
    detail(record_property, f"gap = {gap:.4f} bit, matched-SLO offset = {match:+.4f} bit, {elapsed:.1f} s")
    assert abs(gap - 1.36) <= 0.03
    assert abs(match) <= 0.02
    assert elapsed < 30.0


# --- 3 ---------------------------------------------------------------------------


@pytest.mark.criterion(3, "outage gap versus M")
def test_c3_gap_shape(record_property):
    values = [delta_r_analytic(M, 0.1) for M in range(1, 129)]
    assert values[0] == 0.0
    assert abs(values[19] - 1.36) <= 0.03
    assert all(b > a for a, b in zip(values, values[1:]))

    rows = gap_vs_M(0.1, [2, 5, 20], n_samples=500_000, seed=7)
    parts = []
    for r in rows:
        parts.append(f"M={r.M}: {r.delta_r_analytic:.4f}/{r.delta_r_mc:.4f}/{r.delta_r_mc_alt:.4f}")
        assert abs(r.delta_r_mc - r.delta_r_analytic) <= 0.02
        assert abs(r.delta_r_mc_alt - r.delta_r_analytic) <= 0.02
        # two noise levels agree within the combined interval
        assert abs(r.delta_r_mc - r.delta_r_mc_alt) <= r.ci + r.ci_alt
    detail(record_property, "analytic/MC 6 deg/MC 2 deg: " + ", ".join(parts))


# --- 4 ---------------------------------------------------------------------------


@pytest.mark.criterion(4, "uplink SLO diversity gain of at least 0.5 ln M")
@pytest.mark.parametrize("M", [1, 2, 4, 16])
def test_c4_diversity_gain(M, record_property):
    worst = math.inf
    rng = substream(4, "c4", M)
    gains = [np.ones(M), rng.standard_normal(M) + 1j * rng.standard_normal(M)]
    for deg in (1.0, 6.0, 20.0, 45.0):
        model = Wiener(math.radians(deg))
        for h in gains:
            slo = pnn_ul_slo(ChannelSpec("uplink", "slo", h, model), lower="chain", entropy_method="gaussian_approx")
            clo = pnn_ul_clo(ChannelSpec("uplink", "clo", h, model), "gaussian_approx")
            margin = slo.chi_lower - clo.chi_exact - 0.5 * math.log(M)
            worst = min(worst, margin)
    detail(record_property, f"M={M}: min excess over 0.5 ln M = {worst:.2e} nats")
    assert worst >= -1e-9


# --- 5 ---------------------------------------------------------------------------


def _random_model(rng, direction, topology):
    kind = rng.integers(0, 6)
    if kind == 0:
        return Noncoherent()
    if kind == 1:
        return PartiallyCoherent(Tikhonov(float(rng.uniform(0.0, 50.0))))
    if kind == 2:
        return PartiallyCoherent(WrappedGaussian(float(rng.uniform(0.05, 3.0))))
    if kind == 3:
        return PartiallyCoherent(UniformCircular())
    if kind == 4 and direction == "uplink" and topology == "slo":
        return CompositeWiener(float(rng.uniform(0.0, 1.0)), float(rng.uniform(0.01, 1.0)))
    return Wiener(float(rng.uniform(0.005, 3.0)))


@pytest.mark.criterion(5, "bound consistency")
def test_c5_bound_ordering_random_specs(record_property):
    rng = substream(5, "c5-specs")
    est = EstimatorConfig(n_samples=300, quadrature_nodes=256)
    checked = with_upper = 0
    for i in range(1000):
        direction = ("uplink", "downlink")[rng.integers(0, 2)]
        topology = ("clo", "slo")[rng.integers(0, 2)]
        M = int(rng.integers(1, 9))
        h = rng.standard_normal(M) + 1j * rng.standard_normal(M)
        spec = ChannelSpec(direction, topology, h, _random_model(rng, direction, topology))
        res = phase_noise_number(spec, estimator=EstimatorConfig(est.n_samples, est.quadrature_nodes, seed=i))
        checked += 1
        if res.chi_upper is not None:
            with_upper += 1
            assert res.chi_lower <= res.chi_upper + 1e-9, (spec.to_dict(), res)
    detail(record_property, f"{checked} specs, {with_upper} with an upper bound, ordering held")
    assert checked == 1000


@pytest.mark.criterion(5, "bound consistency")
def test_c5_memoryless_coincidence(record_property):
    # the lower- and upper-bound conditional entropies, estimated independently
    rng = substream(5, "c5-memoryless")
    worst = 0.0
    for i in range(20):
        M = int(rng.integers(2, 6))
        law = Tikhonov(float(rng.uniform(0.5, 20.0))) if i % 2 else WrappedGaussian(float(rng.uniform(0.15, 2.0)))
        lower_term = observation_entropy([law] * M, EstimatorConfig(4_000, seed=2 * i))
        upper_term = observation_entropy([law] * M, EstimatorConfig(4_000, seed=2 * i + 1))
        se = math.hypot(lower_term.std_error, upper_term.std_error)
        ratio = abs(lower_term.value - upper_term.value) / se
        worst = max(worst, ratio)
        assert ratio <= 3.0
    detail(record_property, f"memoryless bound gap <= {worst:.2f} combined std errors")


@pytest.mark.criterion(5, "bound consistency")
def test_c5_clo_reductions(record_property):
    rng = substream(5, "c5-clo")
    models = [Noncoherent(), Wiener(0.1), Wiener(1.2), PartiallyCoherent(Tikhonov(3.0)), PartiallyCoherent(WrappedGaussian(0.4))]
    for model in models:
        for M in (1, 3, 8):
            h = rng.standard_normal(M) + 1j * rng.standard_normal(M)
            up = ul_bounds(ChannelSpec("uplink", "clo", h, model))
            exact = pnn_ul_clo(ChannelSpec("uplink", "clo", h, model)).chi_exact
            assert up.chi_lower == pytest.approx(exact, abs=1e-12)
            assert up.chi_upper == pytest.approx(exact, abs=1e-12)
            down = pnn_dl_bounds(ChannelSpec("downlink", "clo", h, model))
            assert down.chi_upper == pnn_dl_clo(ChannelSpec("downlink", "clo", h, model)).chi_exact
    detail(record_property, "uplink and downlink CLO reductions reproduce the CLO formulas")


# --- 6 ---------------------------------------------------------------------------


@pytest.mark.criterion(6, "distributional suite")
def test_c6_distributional_suite(record_property):
    results = distributional_suite(seed=0, antennas=(1, 2, 4, 8))
    ks = [r for r in results if r.name.startswith("ncx2_ks")]
    power = validate_input_power(SnrSpec.from_db(20.0), n=400_000, seed=6)
    detail(record_property, f"min KS p = {min(r.p_value for r in ks):.3f}, input power z = {power.statistic:+.2f}")
    assert all(r.p_value > 0.01 for r in ks)
    assert all(r.passed for r in results)
    assert abs(power.statistic) <= 3.0


# --- 7 ---------------------------------------------------------------------------


@pytest.mark.criterion(7, "prelog 1/2 of the noncoherent rate lower bound")
def test_c7_prelog(record_property):
    start = time.perf_counter()
    h = [1.0, 1.0]
    r30 = rate_lb_noncoherent_mc(h, SnrSpec.from_db(30.0), n_samples=1_000_000, seed=30)
    r40 = rate_lb_noncoherent_mc(h, SnrSpec.from_db(40.0), n_samples=1_000_000, seed=40)
    elapsed = time.perf_counter() - start
    slope = r40.value - r30.value
    gap = r40.value - r40.asymptote
    detail(record_property, f"slope = {slope:.4f} nats (target {0.5 * math.log(10):.4f}), 40 dB gap = {gap:+.4f} nats, {elapsed:.1f} s")
    assert abs(slope - 0.5 * math.log(10.0)) <= 0.1
    assert abs(gap) <= 0.15
    assert elapsed < 60.0


# --- 8 ---------------------------------------------------------------------------


def _cli_bytes(tmp_path, name, argv):
    out = tmp_path / name
    code = cli.run(argv + ["--output", str(out)], stdout=io.StringIO(), stderr=io.StringIO())
    assert code == cli.EXIT_OK
    return out.read_bytes()


@pytest.mark.criterion(8, "determinism across runs and worker counts")
@pytest.mark.parametrize(
    "argv",
    [
        ["outage", "--n-samples", "300000"],
        ["gap", "--M-list", "2,20", "--n-samples", "200000"],
        ["rate-lb", "--n-samples", "200000", "--snr-db", "30"],
        ["pnn", "--direction", "uplink", "--topology", "slo", "--h", "[1, 0.5, 2]",
         "--model", '{"kind": "wiener", "sigma_deg": 30}', "--n-samples", "10000"],
    ],
    ids=["outage", "gap", "rate-lb", "pnn"],
)
def test_c8_byte_identical(argv, tmp_path, record_property):
    runs = [
        _cli_bytes(tmp_path, "a", argv + ["--workers", "1"]),
        _cli_bytes(tmp_path, "b", argv + ["--workers", "1"]),
        _cli_bytes(tmp_path, "c", argv + ["--workers", "4"]),
    ]
    detail(record_property, f"{argv[0]}: {len(runs[0])} bytes identical for 1/1/4 workers")
    assert runs[0] == runs[1] == runs[2]
