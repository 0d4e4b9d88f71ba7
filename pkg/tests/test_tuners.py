"""Ziegler-Nichols baseline rule and GA gene bounds."""

import numpy as np
import pytest

from pidga.delay import dfr_delay
from pidga.lti import pid_tf, poly_add, poly_mul
from pidga.metrics import routh_stable
from pidga.tuners import (GeneBounds, PidGains, PlantFolpd,
                          bounds_from_baseline, ziegler_nichols)
from pidga.experiment import DEFAULT_DELAYS


# ----------------------------------------------------------------- PlantFolpd

def test_plant_validation():
    with pytest.raises(ValueError):
        PlantFolpd(0.0, 1.0, 0.1)
    with pytest.raises(ValueError):
        PlantFolpd(1.0, 0.0, 0.1)
    with pytest.raises(ValueError):
        PlantFolpd(1.0, 1.0, -0.1)


def test_plant_lag_tf():
    tf = PlantFolpd(2.0, 3.0, 0.1).lag_tf()
    np.testing.assert_array_equal(tf.num, [2.0])
    np.testing.assert_array_equal(tf.den, [3.0, 1.0])


# ------------------------------------------------------------ ziegler_nichols

@pytest.mark.parametrize("delay,expected", [
    (0.1, PidGains(kd=0.6, kp=12.0, ki=60.0)),
    (0.5, PidGains(kd=0.6, kp=2.4, ki=2.4)),
    (1.0, PidGains(kd=0.6, kp=1.2, ki=0.6)),
])
def test_ziegler_nichols_reference_gains(delay, expected):
    got = ziegler_nichols(PlantFolpd(1.0, 1.0, delay))
    assert got.kd == pytest.approx(expected.kd, rel=1e-12)
    assert got.kp == pytest.approx(expected.kp, rel=1e-12)
    assert got.ki == pytest.approx(expected.ki, rel=1e-12)


def test_ziegler_nichols_rejects_zero_delay():
    with pytest.raises(ValueError):
        ziegler_nichols(PlantFolpd(1.0, 1.0, 0.0))


def test_ziegler_nichols_scaling_laws():
    rng = np.random.default_rng(17)
    for _ in range(20):
        k = float(rng.uniform(0.2, 5.0))
        t = float(rng.uniform(0.2, 5.0))
        l = float(rng.uniform(0.05, 2.0))
        base = ziegler_nichols(PlantFolpd(1.0, t, l))
        scaled = ziegler_nichols(PlantFolpd(k, t, l))
        # all gains scale as 1/K
        assert scaled.kp == pytest.approx(base.kp / k, rel=1e-12)
        assert scaled.ki == pytest.approx(base.ki / k, rel=1e-12)
        assert scaled.kd == pytest.approx(base.kd / k, rel=1e-12)
        # kp is proportional to T/L
        assert base.kp == pytest.approx(1.2 * t / l, rel=1e-12)


def test_ziegler_nichols_loops_are_stable_across_sweep_grid():
    for tau in DEFAULT_DELAYS:
        plant = PlantFolpd(1.0, 1.0, tau)
        c = pid_tf(ziegler_nichols(plant))
        lag = plant.lag_tf()
        d = dfr_delay(tau).tf
        num_l = poly_mul(poly_mul(c.num, lag.num), d.num)
        den_l = poly_mul(poly_mul(c.den, lag.den), d.den)
        assert routh_stable(poly_add(den_l, num_l)), f"tau={tau}"


# ----------------------------------------------------------------- GeneBounds

def test_bounds_from_baseline_reference_case():
    b = bounds_from_baseline(PidGains(0.6, 12.0, 60.0), 2.0)
    np.testing.assert_array_equal(b.low, [0.0, 0.0, 0.0])
    np.testing.assert_allclose(b.high, [1.2, 24.0, 120.0])


def test_bounds_from_baseline_zero_gene_fallback():
    b = bounds_from_baseline(PidGains(0.0, 1.0, 1.0), 2.0)
    np.testing.assert_array_equal(b.high, [2.0, 2.0, 2.0])


def test_bounds_from_baseline_custom_factor():
    b = bounds_from_baseline(PidGains(1.0, 1.0, 1.0), 1.5)
    np.testing.assert_array_equal(b.high, [1.5, 1.5, 1.5])


def test_bounds_from_baseline_validation():
    with pytest.raises(ValueError):
        bounds_from_baseline(PidGains(1.0, 1.0, 1.0), 1.0)
    with pytest.raises(ValueError):
        bounds_from_baseline(PidGains(-1.0, 1.0, 1.0), 2.0)


def test_gene_bounds_contains_and_span():
    b = GeneBounds([0.0, 1.0], [2.0, 3.0])
    np.testing.assert_array_equal(b.span, [2.0, 2.0])
    assert b.contains([1.0, 2.0])
    assert b.contains([0.0, 3.0])
    assert not b.contains([2.5, 2.0])


def test_gene_bounds_validation():
    with pytest.raises(ValueError):
        GeneBounds([0.0, 0.0], [1.0])
    with pytest.raises(ValueError):
        GeneBounds([1.0], [1.0])
    with pytest.raises(ValueError):
        GeneBounds([-0.5], [1.0])


def test_gene_bounds_arrays_are_frozen():
    b = GeneBounds([0.0], [1.0])
    with pytest.raises(ValueError):
        b.low[0] = 0.5
