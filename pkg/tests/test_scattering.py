import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ebsim import CavityParams, cold_amplitudes, coupled_amplitudes, critical_photon_number, sweep_spectra
from ebsim._validation import DomainError, EmptyInputError, InvalidParameterError
from ebsim.scattering import local_maxima, scatter_amplitudes


def steady_state_oracle(p: CavityParams, detuning: float) -> tuple[complex, complex]:
    """Solve the linearized equations of motion for the cavity field and dipole.

    With <sigma_z> = -1, input a_in = 1 and a'_in = 0 the steady state satisfies
        [i(wc - w) + kappa + kappa_s/2] a + g s = -sqrt(kappa)
        -g a + [i(wx - w) + gamma/2] s = 0
    and the outputs are a_t = sqrt(kappa) a, a_r = 1 + sqrt(kappa) a.
    """
    m = np.array(
        [
            [1j * (p.omega_c - detuning) + p.kappa + p.kappa_s / 2, p.g],
            [-p.g, 1j * (p.omega_x - detuning) + p.gamma / 2],
        ]
    )
    a, _ = np.linalg.solve(m, [-math.sqrt(p.kappa), 0])
    t = math.sqrt(p.kappa) * a
    return t, 1 + t


# amplitudes frozen from steady_state_oracle and a hand evaluation of the closed form
T_RES = -0.008605851979345956
T_DET1 = -0.05324152385038742 + 0.19627783782891753j


def test_coupled_resonant_working_point(working_point):
    t, r = coupled_amplitudes(working_point, 0.0)
    assert t == pytest.approx(T_RES, abs=1e-15)
    assert r == pytest.approx(1 + T_RES, abs=1e-15)
    assert t == pytest.approx(-0.0086058, abs=1e-7)
    assert r == pytest.approx(0.9913942, abs=1e-7)


def test_coupled_detuned_working_point(working_point):
    t, r = coupled_amplitudes(working_point, 1.0)
    assert t == pytest.approx(T_DET1, abs=1e-14)
    assert t.real == pytest.approx(-0.0532, abs=5e-5)
    assert t.imag == pytest.approx(0.1963, abs=5e-5)
    assert r - t == 1


@pytest.mark.parametrize("detuning", [-3.0, -0.7, 0.0, 0.4, 2.4])
@pytest.mark.parametrize(
    "params",
    [
        CavityParams(),
        CavityParams(g=0.5, gamma=0.1),
        CavityParams(g=1.3, kappa_s=0.8, gamma=0.6, omega_c=0.3, omega_x=-0.2),
        CavityParams(g=2.0, kappa=2.5, kappa_s=0.5, gamma=0.0),
    ],
)
def test_coupled_matches_steady_state_solve(params, detuning):
    t, r = coupled_amplitudes(params, detuning)
    t_ref, r_ref = steady_state_oracle(params, detuning)
    assert abs(t - t_ref) < 1e-13
    assert abs(r - r_ref) < 1e-13


def test_cold_resonant():
    t0, r0 = cold_amplitudes(CavityParams(g=0, kappa_s=0), 0.0)
    assert t0 == -1
    assert r0 == 0


def test_cold_with_side_leakage():
    t0, r0 = cold_amplitudes(CavityParams(kappa_s=1.0), 0.0)
    assert t0 == pytest.approx(-2 / 3, abs=1e-15)
    assert r0 == pytest.approx(1 / 3, abs=1e-15)


@pytest.mark.parametrize("detuning", [1e6, -1e6])
def test_cold_far_detuned_reflects(detuning):
    t0, r0 = cold_amplitudes(CavityParams(), detuning)
    assert abs(t0) < 1e-5
    assert abs(r0 - 1) < 1e-5


def test_cold_independent_of_g_and_gamma():
    a = cold_amplitudes(CavityParams(g=0.1, gamma=0.0), 0.3)
    b = cold_amplitudes(CavityParams(g=5.0, gamma=3.0), 0.3)
    assert a == b


def test_zero_coupling_is_cold_bitwise():
    p = CavityParams(g=0.0, gamma=0.7, kappa_s=0.2)
    grid = np.linspace(-3, 3, 31)
    t, r = coupled_amplitudes(p, grid)
    t0, r0 = cold_amplitudes(p, grid)
    assert np.array_equal(t, t0) and np.array_equal(r, r0)


def test_zero_coupling_zero_linewidth_at_dipole_frequency():
    # 0/0 in the coupled formula; the cold-cavity path is taken instead
    t, r = coupled_amplitudes(CavityParams(g=0.0, gamma=0.0), 0.0)
    assert t == -1 and r == 0


def test_invalid_params():
    with pytest.raises(InvalidParameterError):
        CavityParams(g=float("nan"))
    with pytest.raises(InvalidParameterError):
        CavityParams(kappa=0.0)
    with pytest.raises(InvalidParameterError):
        CavityParams(gamma=-0.1)
    with pytest.raises(InvalidParameterError):
        coupled_amplitudes(CavityParams(), float("inf"))


def test_normalized_rescales_by_kappa():
    p = CavityParams(g=4.8, kappa=2.0, kappa_s=1.0, gamma=0.2, omega_c=0.4, omega_x=-0.2)
    q = p.normalized()
    assert q == CavityParams(g=2.4, kappa=1.0, kappa_s=0.5, gamma=0.1, omega_c=0.2, omega_x=-0.1)
    # amplitudes are dimensionless: scaling all rates and the detuning together leaves them unchanged
    assert coupled_amplitudes(p, 1.0)[0] == pytest.approx(coupled_amplitudes(q, 0.5)[0], abs=1e-15)


rates = st.floats(0.0, 10.0, allow_nan=False)
detunings = st.floats(-20.0, 20.0, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(g=rates, gamma=rates, kappa_s=rates, kappa=st.floats(0.05, 5.0), det=detunings,
       wc=st.floats(-3, 3), wx=st.floats(-3, 3))
def test_amplitude_identities_and_bounds(g, gamma, kappa_s, kappa, det, wc, wx):
    p = CavityParams(g=g, kappa=kappa, kappa_s=kappa_s, gamma=gamma, omega_c=wc, omega_x=wx)
    t, r = coupled_amplitudes(p, det)
    t0, r0 = cold_amplitudes(p, det)
    assert abs((r - t) - 1) <= 1e-12
    assert abs((r0 - t0) - 1) <= 1e-12
    assert abs(r) ** 2 + abs(t) ** 2 <= 1 + 1e-12
    assert abs(r0) ** 2 + abs(t0) ** 2 <= 1 + 1e-12
    for a in (t, r, t0, r0):
        assert abs(a) <= 1 + 1e-12


@settings(max_examples=300, deadline=None)
@given(g=st.floats(0.0, 10.0), det=detunings, wc=st.floats(-3, 3), wx=st.floats(-3, 3))
def test_lossless_unitarity(g, det, wc, wx):
    p = CavityParams(g=g, gamma=0.0, kappa_s=0.0, omega_c=wc, omega_x=wx)
    t, r = coupled_amplitudes(p, det)
    assert abs(abs(r) ** 2 + abs(t) ** 2 - 1) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(g=rates, gamma=rates, kappa_s=rates, det=st.floats(0.0, 20.0))
def test_resonant_spectrum_is_symmetric(g, gamma, kappa_s, det):
    p = CavityParams(g=g, gamma=gamma, kappa_s=kappa_s)
    tp, _ = coupled_amplitudes(p, det)
    tm, _ = coupled_amplitudes(p, -det)
    assert abs(abs(tp) - abs(tm)) <= 1e-12


def test_sweep_matches_pointwise(working_point):
    grid = np.linspace(-4, 4, 17)
    table = sweep_spectra(working_point, grid)
    assert len(table) == 17
    for row, d in zip(table.rows(), grid):
        a = scatter_amplitudes(working_point, d)
        assert row[0] == d
        assert row[1:5] == pytest.approx([abs(a.t), abs(a.r), abs(a.t0), abs(a.r0)], abs=1e-15)
        assert row[5:] == pytest.approx([np.angle(a.t), np.angle(a.r), np.angle(a.t0), np.angle(a.r0)], abs=1e-15)


def test_sweep_errors(working_point):
    with pytest.raises(EmptyInputError):
        sweep_spectra(working_point, [])
    with pytest.raises(InvalidParameterError):
        sweep_spectra(working_point, [1.0, 0.0])


def test_rabi_doublet(working_point):
    table = sweep_spectra(working_point, np.linspace(-5, 5, 2001))
    peaks = table.detuning[local_maxima(np.abs(table.t))]
    assert len(peaks) == 2
    for peak, expected in zip(sorted(peaks), (-2.4, 2.4)):
        assert abs(peak - expected) <= 0.05 * 2.4


def test_cold_cavity_single_peak():
    table = sweep_spectra(CavityParams(g=0.0), np.linspace(-5, 5, 1001))
    idx = local_maxima(np.abs(table.t))
    assert len(idx) == 1
    assert table.detuning[idx[0]] == pytest.approx(0.0, abs=1e-12)
    assert abs(table.t[idx[0]]) == pytest.approx(1.0, abs=1e-15)


def test_one_dimensional_atom_dip():
    p = CavityParams(g=0.5, gamma=0.1)
    table = sweep_spectra(p, np.linspace(-3, 3, 601))
    mid = np.argmin(np.abs(table.detuning))
    abs_t = np.abs(table.t)
    # dip at resonance flanked by two maxima
    assert abs_t[mid] < abs_t[mid - 50] and abs_t[mid] < abs_t[mid + 50]
    assert len(local_maxima(abs_t)) == 2
    # depth: kappa*(gamma/2) / ((gamma/2)*kappa + g^2) = 0.05 / 0.3
    assert abs_t[mid] == pytest.approx(0.05 / 0.3, abs=1e-12)


def test_local_maxima_plateau():
    assert local_maxima([0, 1, 1, 0, 2, 0]).tolist() == [1, 4]
    assert local_maxima([0, 1]).tolist() == []


def test_critical_photon_number():
    assert critical_photon_number(CavityParams(g=2.4, gamma=0.1)) == pytest.approx(0.01 / 11.52, rel=1e-14)
    assert critical_photon_number(CavityParams(g=2.4, gamma=0.1)) == pytest.approx(8.6806e-4, abs=5e-9)
    assert critical_photon_number(CavityParams(g=0.3, gamma=0.3)) == pytest.approx(0.5, rel=1e-15)
    assert critical_photon_number(CavityParams(g=1.0, gamma=0.0)) == 0.0
    with pytest.raises(DomainError):
        critical_photon_number(CavityParams(g=0.0))


@settings(max_examples=200, deadline=None)
@given(g=rates, gamma=rates, kappa_s=rates, det=detunings, wx=st.floats(-3, 3))
def test_scalar_and_array_paths_agree(g, gamma, kappa_s, det, wx):
    p = CavityParams(g=g, gamma=gamma, kappa_s=kappa_s, omega_x=wx)
    t_scalar, _ = coupled_amplitudes(p, det)
    t_array, _ = coupled_amplitudes(p, np.array([det, det]))
    assert abs(t_scalar - t_array[0]) <= 1e-14
    assert isinstance(t_scalar, complex)


def test_subnormal_linewidth_on_resonance():
    p = CavityParams(g=1e-300, gamma=1e-313)
    t, _ = coupled_amplitudes(p, 0.0)
    assert t == pytest.approx(-1.0, abs=1e-12)
    assert coupled_amplitudes(p, np.array([0.0]))[0][0] == pytest.approx(-1.0, abs=1e-12)
