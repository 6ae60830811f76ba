import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from socialhc.errors import ConfigurationError, RangeError
from socialhc.scaling import (CROSSOVER, HC_WINS, MH_WINS, TIE, bursty_fraction, classify_regime,
                              dominance_by_frontiers, dominant_protocol, hc_tradeoff_dense,
                              hc_tradeoff_extended, hierarchy_bound, mh_dominance_threshold,
                              mh_tradeoff_dense, mh_tradeoff_extended)


@pytest.mark.parametrize("q_growth,gamma,label", [
    ("constant", 1, "A"), ("constant", 0, "A"), ("constant", 2, "B"), ("constant", 2.5, "B"),
    ("constant", 3, "B"), ("constant", 4, "C"), ("growing", 4, "A"), ("growing", 2.5, "A")])
def test_classify(q_growth, gamma, label):
    assert classify_regime(q_growth, gamma) == label


def test_classify_errors():
    with pytest.raises(ConfigurationError):
        classify_regime("constant", -0.1)
    with pytest.raises(ConfigurationError):
        classify_regime("sometimes", 1)


def test_mh_dense_examples():
    c = mh_tradeoff_dense(4, "constant", -1)
    assert (c.throughput_exponent, c.throughput_log_power) == (1.0, -1.0)
    assert (c.delay_exponent, c.delay_log_power) == (0.0, 0.0)
    a = mh_tradeoff_dense(1, "constant", 0)
    assert (a.throughput_exponent, a.delay_exponent) == (0.0, 0.0)
    b = mh_tradeoff_dense(2.5, "constant", -1)
    assert b.throughput_exponent == pytest.approx(0.75)
    assert b.delay_exponent == pytest.approx(0.25)


def test_mh_dense_range():
    with pytest.raises(RangeError):
        mh_tradeoff_dense(1, "constant", -1.2)
    with pytest.raises(RangeError):
        mh_tradeoff_dense(1, "constant", -1, 0)  # 1/n is below log n / n
    with pytest.raises(RangeError):
        mh_tradeoff_dense(1, "constant", 0.5)
    with pytest.raises(RangeError):
        mh_tradeoff_dense(4, "constant", -0.5)  # regime C caps a at log n / n
    with pytest.raises(RangeError):
        mh_tradeoff_dense(2.5, "constant", -0.2)


@settings(max_examples=200)
@given(st.floats(0, 6), st.floats(-1, 0))
def test_mh_dense_t_minus_d(gamma, x):
    try:
        p = mh_tradeoff_dense(gamma, "constant", x)
    except RangeError:
        return
    regime = classify_regime("constant", gamma)
    expected = {"A": 0.0, "B": gamma - 2, "C": 1.0}[regime]
    assert p.throughput_exponent - p.delay_exponent == pytest.approx(expected)
    assert p.delay_exponent >= 0


def test_mh_extended_examples():
    a = mh_tradeoff_extended(1, "constant", 3, 0)
    assert (a.throughput_exponent, a.delay_exponent) == (0.5, 0.5)
    assert a.throughput_log_power == -2.0 and a.delay_log_power == -0.5
    c = mh_tradeoff_extended(4, "constant", 3, 0)
    assert (c.throughput_exponent, c.delay_exponent) == (1.0, 0.0)
    t2 = mh_tradeoff_extended(1, "constant", 2, 0.3).throughput_exponent
    t3 = mh_tradeoff_extended(1, "constant", 3, 0.3).throughput_exponent
    assert t3 < t2
    with pytest.raises(RangeError):
        mh_tradeoff_extended(1, "constant", 3, -0.1)
    with pytest.raises(ConfigurationError):
        mh_tradeoff_extended(1, "constant", 1.5, 0)


def test_hc_dense_examples():
    b = 0.4
    p = hc_tradeoff_dense(2.5, "constant", b)
    assert p.throughput_exponent == pytest.approx((b + 1) / 2)
    assert p.delay_exponent == pytest.approx(b / 2)
    assert (p.throughput_epsilon, p.delay_epsilon) == (-1.0, 1.0)
    c = hc_tradeoff_dense(4, "constant", b)
    assert (c.throughput_exponent, c.delay_exponent) == (1.0, 0.0)
    z = hc_tradeoff_dense(1, "constant", 0)
    assert (z.throughput_exponent, z.delay_exponent) == (0.0, 0.0)
    assert z.evaluate(0.05) == pytest.approx((-0.05, 0.05))


@pytest.mark.parametrize("b", [-0.1, 1.0, 1.5])
def test_b_range(b):
    with pytest.raises(ConfigurationError):
        hc_tradeoff_dense(1, "constant", b)
    with pytest.raises(ConfigurationError):
        hc_tradeoff_extended(1, "constant", 3, b)


def test_hierarchy_bound():
    assert hierarchy_bound(1) == 0.5
    assert hierarchy_bound(3) == 0.75
    hc_tradeoff_dense(1, "constant", 0.5, h=1)
    with pytest.raises(ConfigurationError):
        hc_tradeoff_dense(1, "constant", 0.6, h=1)


def test_hc_extended_examples():
    b = 0.3
    a2 = hc_tradeoff_extended(1, "constant", 2, b)
    d = hc_tradeoff_dense(1, "constant", b)
    assert a2.throughput_exponent == pytest.approx(d.throughput_exponent, abs=1e-12)
    assert a2.delay_exponent == pytest.approx(d.delay_exponent, abs=1e-12)
    c = hc_tradeoff_extended(4, "constant", 3, b)
    assert (c.throughput_exponent, c.delay_exponent) == (1.0, 0.0)
    b3 = hc_tradeoff_extended(3, "constant", 3, b)
    assert (b3.throughput_exponent, b3.delay_exponent) == (1.0, 0.0)


@settings(max_examples=200)
@given(st.floats(0, 0.999), st.floats(2, 6))
def test_boundary_continuity(b, alpha):
    below = hc_tradeoff_dense(1.999999999, "constant", b)
    at2 = hc_tradeoff_dense(2, "constant", b)
    assert at2.throughput_exponent == b and at2.delay_exponent == b
    assert below.throughput_exponent == b
    at3 = hc_tradeoff_dense(3, "constant", b)
    assert (at3.throughput_exponent, at3.delay_exponent) == (1.0, 0.0)
    ext2 = hc_tradeoff_extended(2, "constant", alpha, b)
    ext_a = hc_tradeoff_extended(1, "constant", alpha, b)
    assert ext2.throughput_exponent == pytest.approx(ext_a.throughput_exponent, abs=1e-12)
    assert ext2.delay_exponent == ext_a.delay_exponent
    ext3 = hc_tradeoff_extended(3, "constant", alpha, b)
    assert (ext3.throughput_exponent, ext3.delay_exponent) == (1.0, 0.0)


@settings(max_examples=100)
@given(st.floats(2, 6), st.floats(-1, 0))
def test_mh_rows_continuous(alpha, x):
    for gamma_lo, gamma_hi in ((1.9999999999, 2.0), (3.0, 3.0000000001)):
        try:
            lo = mh_tradeoff_dense(gamma_lo, "constant", x)
            hi = mh_tradeoff_dense(gamma_hi, "constant", x)
        except RangeError:
            continue
        assert lo.throughput_exponent == pytest.approx(hi.throughput_exponent, abs=1e-9)
        assert lo.throughput_log_power == pytest.approx(hi.throughput_log_power, abs=1e-9)
    for gamma_lo, gamma_hi in ((1.9999999999, 2.0), (3.0, 3.0000000001)):
        xe = -x
        try:
            lo = mh_tradeoff_extended(gamma_lo, "constant", alpha, xe)
            hi = mh_tradeoff_extended(gamma_hi, "constant", alpha, xe)
        except RangeError:
            continue
        assert lo.throughput_exponent == pytest.approx(hi.throughput_exponent, abs=1e-9)
        assert lo.delay_exponent == pytest.approx(hi.delay_exponent, abs=1e-9)


def test_bursty_fraction_examples():
    assert bursty_fraction("A", 1, 2).duty_fraction_exponent == 0.0
    assert bursty_fraction("A", 1, 4).duty_fraction_exponent == 1.0
    assert bursty_fraction("B", 3, 5).duty_fraction_exponent == 0.0
    assert bursty_fraction("C", 4, 5).duty_fraction_exponent == 0.0
    assert bursty_fraction("A", 1, 4).epsilon_coefficient == 1.0


@settings(max_examples=200)
@given(st.floats(0, 5), st.floats(2, 6), st.floats(0, 0.999))
def test_bursty_fraction_links_dense_and_extended(gamma, alpha, b):
    regime = classify_regime("constant", gamma)
    f = bursty_fraction(regime, gamma, alpha).duty_fraction_exponent
    assert f >= -1e-12
    dense = hc_tradeoff_dense(gamma, "constant", b).throughput_exponent
    ext = hc_tradeoff_extended(gamma, "constant", alpha, b).throughput_exponent
    assert ext == pytest.approx(dense - f, abs=1e-9)


def test_dominance_examples():
    assert dominant_protocol(1, "constant", 3, "extended").winner == MH_WINS
    assert mh_dominance_threshold(3) == pytest.approx(15 / 7)
    assert dominant_protocol(2.1, "constant", 3, "extended").winner == MH_WINS
    r = dominant_protocol(2.5, "constant", 3, "extended")
    assert r.winner == CROSSOVER and r.threshold == pytest.approx(15 / 7)
    assert dominant_protocol(1, "constant", 2.5, "extended").winner == CROSSOVER
    for gamma in (0.5, 2.5, 4):
        assert dominant_protocol(gamma, "constant", 2, "extended").winner in (HC_WINS, TIE)
        assert dominant_protocol(gamma, "constant", 3, "dense").winner in (HC_WINS, TIE)
    assert dominant_protocol(4, "constant", 3, "extended").winner == TIE


def test_dominance_agrees_with_frontier_comparison():
    for mode in ("dense", "extended"):
        for q_growth in ("constant", "growing"):
            for gamma in np.linspace(0, 5, 41):
                for alpha in np.linspace(2, 6, 33):
                    closed = dominant_protocol(gamma, q_growth, alpha, mode).winner
                    assert closed == dominance_by_frontiers(gamma, q_growth, alpha, mode), \
                        (mode, q_growth, gamma, alpha)


def test_threshold_edges_by_direct_comparison():
    assert dominance_by_frontiers(15 / 7, "constant", 3, "extended") == MH_WINS
    assert dominance_by_frontiers(15 / 7 + 1e-6, "constant", 3, "extended") == CROSSOVER
    edge = 1 + math.sqrt(3)
    assert dominance_by_frontiers(1, "constant", edge + 1e-6, "extended") == MH_WINS
    assert dominance_by_frontiers(1, "constant", edge - 1e-6, "extended") == CROSSOVER
