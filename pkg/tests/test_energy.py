"""Renormalized energy density, cavity energy, and adiabaticity."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cavsta.energy import (
    ThermalState,
    adiabatic_energy,
    adiabaticity,
    density,
    energy_record,
    eval_mode,
    thermal_Z,
    total_energy,
)
from cavsta.errors import DensityError


def test_thermal_sum_basics():
    assert thermal_Z(0.0) == 0.0
    x = np.array([0.3, 0.7, 1.1, 2.0, 4.0])
    z = np.array([thermal_Z(v) for v in x])
    assert np.all(np.diff(z) > 0)
    assert np.all(z > 0)


def test_thermal_sum_closed_form_at_half():
    # sum n pi / (e^{2 pi n} - 1) = pi/24 - 1/8, a classical Lambert-series value
    assert thermal_Z(0.5) == pytest.approx(np.pi / 24.0 - 0.125, abs=1e-15)


def test_thermal_sum_high_temperature_limit():
    # Z(x) -> pi x^2 / 6 - x/2 + ... for large x
    x = 50.0
    assert thermal_Z(x) == pytest.approx(np.pi * x * x / 6.0 - x / 2.0, rel=1e-3)


def test_kinetic_weight_combines_vacuum_and_thermal():
    st = ThermalState(0.5, 1.0)
    assert st.kinetic_weight == pytest.approx(-0.125, abs=1e-15)
    cold = ThermalState(0.0, 1.0)
    assert cold.kinetic_weight == pytest.approx(-np.pi / 24.0, abs=1e-16)


def test_static_density_uniform(static_unit):
    pair, moore = static_unit
    st = ThermalState(1.0, pair.d0)
    x = np.linspace(0.0, 1.0, 41)
    d = density(moore, x, 0.8, st)
    assert_allclose(d, st.kinetic_weight / pair.d0 ** 2, rtol=1e-12)


def test_static_energy_closed_form(static_unit):
    pair, moore = static_unit
    for T in (0.0, 1.0, 5.0):
        st = ThermalState(T, pair.d0)
        E = total_energy(moore, pair, 0.37, st)
        assert E == pytest.approx(st.kinetic_weight / pair.d0, rel=1e-12, abs=1e-15)


def test_density_positions_validated(contraction12):
    s = contraction12
    st = ThermalState(0.0, 1.0)
    with pytest.raises(DensityError):
        density(s.exact_ref, -0.5, 0.5, st)
    with pytest.raises(DensityError):
        density(s.exact_ref, 1.2, 0.5, st)


def test_vacuum_energy_rises_during_contraction(contraction12):
    s = contraction12
    st = ThermalState(0.0, 1.0)
    E0 = total_energy(s.exact_ref, s.pair, -1.5, st)
    E_final = total_energy(s.exact_ref, s.pair, 2.4, st)
    # the cavity shrinks to df = 0.4, so |Casimir energy| grows
    assert E_final < E0 < 0.0


def test_quadrature_insensitive_to_base_resolution(contraction12):
    s = contraction12
    st = ThermalState(1.0, 1.0)
    coarse = total_energy(s.exact_ref, s.pair, 0.9, st, points=501)
    fine = total_energy(s.exact_ref, s.pair, 0.9, st, points=4001)
    assert coarse == pytest.approx(fine, rel=1e-9)


def test_adiabatic_energy_scales_inversely_with_length():
    st = ThermalState(0.0, 1.0)
    assert adiabatic_energy(0.5, st) == pytest.approx(2.0 * adiabatic_energy(1.0, st))
    with pytest.raises(ValueError):
        adiabatic_energy(0.0, st)
    with pytest.raises(ValueError):
        adiabatic_energy(-1.0, st)


def test_adiabaticity_guard():
    assert adiabaticity(3.0, 1.5) == 2.0
    with pytest.raises(ZeroDivisionError):
        adiabaticity(1.0, 0.0)


def test_mode_validation(static_unit):
    _, moore = static_unit
    with pytest.raises(ValueError):
        eval_mode(moore, 0, 0.5, 0.0)
    with pytest.raises(ValueError):
        eval_mode(moore, 1.5, 0.5, 0.0)


def test_static_modes_are_standing_waves(static_unit):
    pair, moore = static_unit
    x = np.linspace(0.0, 1.0, 21)
    psi = eval_mode(moore, 1, x, 0.3)
    # |psi_1| = sin(pi x)/sqrt(pi) for the unit cavity
    assert_allclose(np.abs(psi), np.abs(np.sin(np.pi * x)) / np.sqrt(np.pi), atol=1e-12)


def test_energy_record_layout(contraction12):
    s = contraction12
    times = np.linspace(-0.5, 2.0, 7)
    states = [ThermalState(T, 1.0) for T in (0.0, 1.0)]
    rec = energy_record(times, states, s.exact_ref, s.pair, s.exact_eff, s.eff_pair)
    assert rec.E_ref.shape == (2, 7)
    assert rec.Q_eff.shape == (2, 7)
    assert np.all(np.isfinite(rec.E_ref))
    assert np.all(np.isfinite(rec.Q_eff))
    # pre-motion samples are exactly adiabatic
    assert rec.Q_ref[0, 0] == pytest.approx(1.0, abs=1e-9)


def test_energy_record_handles_missing_solver(contraction12):
    s = contraction12
    times = np.linspace(-0.5, 1.0, 4)
    states = [ThermalState(0.0, 1.0)]
    rec = energy_record(times, states, None, s.pair, None, None)
    assert np.all(np.isnan(rec.E_ref))
    assert np.all(np.isnan(rec.E_eff))
    assert np.all(np.isfinite(rec.E_ad_ref))
    assert np.all(np.isnan(rec.E_ad_eff))


def test_energy_record_threaded_matches_serial(contraction12):
    s = contraction12
    times = np.linspace(0.2, 1.4, 5)
    states = [ThermalState(1.0, 1.0)]
    serial = energy_record(times, states, s.exact_ref, s.pair, threads=1)
    threaded = energy_record(times, states, s.exact_ref, s.pair, threads=4)
    assert_allclose(serial.E_ref, threaded.E_ref, rtol=0, atol=0)
