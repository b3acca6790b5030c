import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qbm_decoherence.kernels import CoefficientMode, compute_heating
from qbm_decoherence.spectral import SpectralModel, ThermalBath, markovian_delta
from qbm_decoherence.zeno import (DegenerateModelError, ZenoClass, _sign_change_brackets,
                                  classify, crossover_map, crossover_times,
                                  effective_decay_rate, zeno_ratio)

BATH = ThermalBath(100.0)
MARKOV = CoefficientMode.MARKOVIAN


def test_classification_rules():
    assert classify(0.5) is ZenoClass.QZE
    assert classify(1.5) is ZenoClass.AZE
    assert classify(1.0005) is ZenoClass.BOUNDARY
    assert classify(float("nan")) is ZenoClass.MISSING


def test_sign_change_brackets():
    assert _sign_change_brackets(np.array([-1.0, -0.5, 0.5, 1.0, -1.0])) == [(1, 2), (3, 4)]
    assert _sign_change_brackets(np.array([-1.0, 0.0, 1.0])) == [(1, 1)]
    assert _sign_change_brackets(np.zeros(4)) == []


def test_markovian_mode_is_flat():
    m = SpectralModel.named("ohmic", 0.1, 1.0)
    assert effective_decay_rate(m, BATH, 0.7, mode=MARKOV) == markovian_delta(m, BATH)
    assert zeno_ratio(m, BATH, 0.7, mode=MARKOV) == 1.0
    assert crossover_times(m, BATH, (0.05, 50.0), mode=MARKOV) == []


def test_rate_is_heating_over_tau():
    m = SpectralModel.named("subohmic", 0.1, 2.0)
    assert effective_decay_rate(m, BATH, 1.3) == pytest.approx(
        compute_heating(m, BATH, 1.3) / 1.3, rel=1e-15)
    with pytest.raises(ValueError):
        effective_decay_rate(m, BATH, 0.0)


def test_short_and_long_interval_limits_ohmic_resonance():
    m = SpectralModel.named("ohmic", 0.1, 1.0)
    dm = markovian_delta(m, BATH)
    assert effective_decay_rate(m, BATH, 1e-3) < 1e-2 * dm
    assert effective_decay_rate(m, BATH, 50.0) == pytest.approx(dm, rel=2e-2)


def test_jolt_gives_anti_zeno_off_resonance():
    m = SpectralModel.named("ohmic", 0.1, 0.1)
    assert zeno_ratio(m, BATH, 1.0 / m.omega_c) > 1


def test_degenerate_model():
    with pytest.raises(DegenerateModelError):
        zeno_ratio(SpectralModel.named("ohmic", 0.0, 1.0), BATH, 1.0)


def test_ohmic_above_resonance_has_no_crossover():
    m = SpectralModel.named("ohmic", 0.1, 2.0)
    assert crossover_times(m, BATH, (0.05 / 2.0, 50.0 / 2.0)) == []


def test_superohmic_two_crossovers():
    m = SpectralModel.named("superohmic", 0.1, 1.2)
    roots = crossover_times(m, BATH, (0.05 / 1.2, 10.0 / 1.2))
    assert len(roots) == 2
    for tau in roots:
        assert abs(zeno_ratio(m, BATH, tau) - 1) < 1e-4
    # QZE before the first root, AZE between them, QZE after.
    lo, hi = roots
    assert zeno_ratio(m, BATH, 0.5 * lo) < 1 < zeno_ratio(m, BATH, math.sqrt(lo * hi))
    assert zeno_ratio(m, BATH, 2 * hi) < 1


def test_single_cell_markovian_map():
    zmap = crossover_map("ohmic", 0.1, BATH, [1.0], [1.0], mode=MARKOV)
    assert zmap.ratio.shape == (1, 1) and zmap.ratio[0, 0] == 1.0
    assert zmap.classification[0, 0] == "boundary"
    assert zmap.complete and len(zmap.roots[0]) == 0


def test_map_records_failures_instead_of_raising():
    zmap = crossover_map("ohmic", 0.0, BATH, [1.0], [0.5, 1.0])
    assert not zmap.complete
    assert np.all(np.isnan(zmap.ratio))
    assert set(zmap.classification.ravel()) == {"missing"}


def test_map_grid_validation():
    with pytest.raises(ValueError):
        crossover_map("ohmic", 0.1, BATH, [], [1.0])
    with pytest.raises(ValueError):
        crossover_map("ohmic", 0.1, BATH, [1.0], [-1.0])


def test_map_is_deterministic_across_workers():
    args = ("subohmic", 0.1, BATH, [0.5, 1.0, 2.0], np.geomspace(0.05, 10, 12))
    a = crossover_map(*args, n_scan=60, workers=1)
    b = crossover_map(*args, n_scan=60, workers=2)
    assert np.array_equal(a.ratio, b.ratio)
    assert all(np.array_equal(x, y) for x, y in zip(a.roots, b.roots))


def test_map_column_lookup_and_units():
    zmap = crossover_map("superohmic", 0.1, BATH, [1.0, 1.2, 1.5], [0.5, 2.0], n_scan=100,
                         root_range=(0.05, 10.0))
    col = zmap.column(1.19)
    assert zmap.r_grid[col] == 1.2
    assert len(zmap.roots[col]) == 2
    # Roots are reported as omega_c tau.
    m = SpectralModel.named("superohmic", 0.1, 1.2)
    for wct in zmap.roots[col]:
        assert abs(zeno_ratio(m, BATH, wct / 1.2) - 1) < 1e-4


@settings(max_examples=20)
@given(st.floats(2.0, 10.0), st.floats(0.01, 5.0), st.floats(1.0, 3.0))
def test_accumulated_decay_non_decreasing_when_delta_positive(r, tau, factor):
    # Above resonance the Ohmic diffusion coefficient stays positive, so
    # tau * rate(tau) = N(tau) cannot decrease.
    m = SpectralModel.named("ohmic", 0.1, r)
    t2 = tau * factor
    assert t2 * effective_decay_rate(m, BATH, t2) >= tau * effective_decay_rate(m, BATH, tau) \
        - 1e-12
