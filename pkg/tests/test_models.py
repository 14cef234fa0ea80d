import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from phasenoise.circular import LOG_TWO_PI, TWO_PI, Tikhonov, UniformCircular, WrappedGaussian
from phasenoise.models import (
    CompositeWiener,
    Noncoherent,
    PartiallyCoherent,
    Topology,
    UnsupportedModelError,
    Wiener,
    entropy_rate,
    has_uniform_marginal,
    is_memoryless,
    marginal_law,
    model_from_dict,
    model_to_dict,
    past_mutual_information,
    sample_path,
)
from phasenoise.streams import substream

from .oracle_values import TIKHONOV_ENTROPY, WRAPPED_ENTROPY_DEG

SIX = math.radians(6.0)
H_DELTA_6 = WRAPPED_ENTROPY_DEG[6.0]


def test_entropy_rate_examples():
    assert entropy_rate(Noncoherent()).value == pytest.approx(1.8378771, abs=1e-7)
    assert entropy_rate(Wiener(SIX)).value == pytest.approx(H_DELTA_6, abs=1e-12)
    assert entropy_rate(PartiallyCoherent(Tikhonov(10.0))).value == pytest.approx(TIKHONOV_ENTROPY[10.0], rel=1e-13)
    # 6 degrees: the unwrapped approximation agrees to far below the quoted digits
    assert entropy_rate(Wiener(SIX), "gaussian_approx").value == pytest.approx(-0.83757, abs=1e-4)


def test_composite_marginal_innovation():
    m = CompositeWiener(0.1, 0.2)
    assert entropy_rate(m).value == pytest.approx(entropy_rate(Wiener(math.hypot(0.1, 0.2))).value, abs=1e-14)


def test_past_information_examples():
    assert past_mutual_information(Noncoherent()) == 0.0
    assert past_mutual_information(PartiallyCoherent(Tikhonov(3.0))) == 0.0
    assert past_mutual_information(Wiener(SIX)) == pytest.approx(LOG_TWO_PI - H_DELTA_6, abs=1e-12)
    assert past_mutual_information(Wiener(SIX)) == pytest.approx(2.6755, abs=1e-4)
    assert past_mutual_information(Wiener(50.0)) < 1e-6
    with pytest.raises(UnsupportedModelError):
        past_mutual_information(CompositeWiener(0.1, 0.1))


def test_model_validation():
    for bad in (0.0, -0.1, math.nan, math.inf):
        with pytest.raises(ValueError):
            Wiener(bad)
    with pytest.raises(ValueError):
        CompositeWiener(0.0, 0.0)
    with pytest.raises(ValueError):
        CompositeWiener(-1.0, 0.1)


def test_model_predicates():
    assert is_memoryless(Noncoherent()) and not is_memoryless(Wiener(0.1))
    assert has_uniform_marginal(Wiener(0.1))
    assert has_uniform_marginal(PartiallyCoherent(UniformCircular()))
    assert has_uniform_marginal(PartiallyCoherent(Tikhonov(0.0)))
    assert not has_uniform_marginal(PartiallyCoherent(Tikhonov(1.0)))
    assert marginal_law(PartiallyCoherent(Tikhonov(1.0))) == Tikhonov(1.0)
    assert marginal_law(Wiener(0.1)) == UniformCircular()


MODELS = [
    Noncoherent(),
    PartiallyCoherent(Tikhonov(5.0)),
    PartiallyCoherent(WrappedGaussian(0.3)),
    Wiener(0.1),
    CompositeWiener(0.05, 0.1),
]


@pytest.mark.parametrize("model", MODELS)
def test_clo_rows_identical(model):
    p = sample_path(model, Topology.CLO, 4, 500, substream(0, "clo"))
    assert p.phases.shape == (4, 500)
    for row in p.phases[1:]:
        assert row.tobytes() == p.phases[0].tobytes()
    assert np.all((p.phases >= 0.0) & (p.phases < TWO_PI))


@pytest.mark.parametrize("model", MODELS)
def test_slo_rows_differ(model):
    p = sample_path(model, "slo", 3, 200, substream(0, "slo"))
    assert not np.array_equal(p.phases[0], p.phases[1])


def test_wiener_increment_std():
    p = sample_path(Wiener(0.1), Topology.SLO, 2, 100_000, substream(1, "inc"))
    d = np.angle(np.exp(1j * np.diff(p.phases, axis=1)))
    for row in d:
        circ_std = math.sqrt(-2.0 * math.log(abs(np.exp(1j * row).mean())))
        assert circ_std == pytest.approx(0.1, rel=0.01)


def test_noncoherent_lag1_autocorrelation():
    p = sample_path(Noncoherent(), "slo", 1, 100_000, substream(2, "ac"))
    z = np.exp(1j * p.phases[0])
    r = (z[1:] * np.conj(z[:-1])).mean()
    assert abs(r) < 3.0 * math.sqrt(2.0 / z.size)


def test_wiener_marginal_uniform():
    # one sample per independent path, taken late in the walk
    p = sample_path(Wiener(0.05), "slo", 5000, 50, substream(3, "marg"))
    assert stats.kstest(p.phases[:, -1], stats.uniform(0.0, TWO_PI).cdf).pvalue > 0.01


def test_composite_shares_transmitter_walk():
    m = CompositeWiener(0.3, 1e-9)
    p = sample_path(m, "slo", 3, 1000, substream(4, "tx"))
    d = np.angle(np.exp(1j * (p.phases[0] - p.phases[1])))
    # receiver walks are nearly frozen, so antennas differ by a constant
    assert np.std(d) < 1e-5


def test_sample_path_rejects_bad_sizes():
    with pytest.raises(ValueError):
        sample_path(Noncoherent(), "clo", 0, 10, substream(0))


@pytest.mark.parametrize("model", MODELS)
def test_json_round_trip(model):
    back = model_from_dict(model_to_dict(model))
    assert type(back) is type(model)
    assert entropy_rate(back).value == pytest.approx(entropy_rate(model).value, abs=1e-12)


def test_tikhonov_shorthand_and_unknown_kind():
    assert model_from_dict({"kind": "tikhonov", "lambda": 2.0}) == PartiallyCoherent(Tikhonov(2.0))
    with pytest.raises(ValueError):
        model_from_dict({"kind": "flicker"})


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-3, 30.0))
def test_entropy_rate_bounded_and_information_nonnegative(s):
    assert entropy_rate(Wiener(s)).value <= LOG_TWO_PI + 1e-12
    assert past_mutual_information(Wiener(s)) >= 0.0
