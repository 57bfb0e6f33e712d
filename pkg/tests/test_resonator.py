import numpy as np
import pytest
from ringtrap.models.errors import PhysicsDomainError, SchemeInfeasibleError
from ringtrap.models.resonator import (
    BOTH_GOAL,
    DriveTone,
    ResonatorParams,
    ZERO_LATTICE_GOAL,
    ZERO_VECTOR_SHIFT_GOAL
)
from ringtrap.physics.resonator import (
    buildup_factors,
    drive_response,
    elimination_scheme,
    energy_balance_error,
    ensure_incoherent,
    mode_amplitudes,
    model_spectrum,
    peak_detuning,
    required_power,
    scheme_drive_tones
)

TWO_PI = 2 * np.pi
OMEGA0 = TWO_PI * 335e12


def _params(kappa_GHz, beta_GHz, kappa_c_GHz=0.5):
    return ResonatorParams.from_total_kappa(
        OMEGA0, TWO_PI * kappa_GHz * 1e9, TWO_PI * beta_GHz * 1e9, kappa_c=TWO_PI * kappa_c_GHz * 1e9)


def test_buildup_is_even_in_detuning():
    detunings = np.linspace(-3, 3, 13)
    f, f_tilde = buildup_factors(1.0, 0.4, detunings)
    np.testing.assert_allclose(f, f[::-1])
    np.testing.assert_allclose(f_tilde, f_tilde[::-1])


def test_without_backscattering_the_lattice_vanishes():
    f, f_tilde = buildup_factors(1.0, 0.0, np.array([0.0, 0.7]))
    np.testing.assert_allclose(f, f_tilde)
    assert f[0] == pytest.approx(4.0)


@pytest.mark.parametrize("beta", [0.1, 0.6, 1.5])
def test_peak_detuning_is_the_maximum(beta):
    params = _params(1.0, beta)
    peak = peak_detuning(params)
    scan = np.linspace(0, 4 * params.kappa, 4001)
    f, _ = buildup_factors(params.kappa, params.beta, scan)
    assert peak == pytest.approx(scan[np.argmax(f)], abs=2 * (scan[1] - scan[0]))


def test_weak_backscattering_peaks_on_resonance():
    assert peak_detuning(_params(1.0, 0.2)) == 0.0


def test_energy_balance():
    params = _params(1.0, 0.6)
    tone = DriveTone("plus", 1e-3, OMEGA0 + TWO_PI * 0.3e9)
    assert energy_balance_error(params, tone) < 1e-9


@pytest.mark.parametrize("port", ["plus", "minus"])
def test_mode_amplitudes_match_the_buildup(port):
    params = _params(1.0, 0.6)
    tone = DriveTone(port, 1e-3, OMEGA0 + TWO_PI * 0.3e9)
    a_plus, a_minus = mode_amplitudes(params, tone)
    response = drive_response(params, tone)
    assert abs(a_plus) ** 2 + abs(a_minus) ** 2 == pytest.approx(response.I_buildup, rel=1e-9)
    assert abs(a_plus) ** 2 - abs(a_minus) ** 2 == pytest.approx(
        tone.sign * response.I_tilde, rel=1e-9)


def test_required_power_hits_target():
    params = _params(1.0, 0.6)
    detuning = TWO_PI * 0.4e9
    power = required_power(params, detuning, 2.4e5)
    response = drive_response(params, DriveTone("plus", power, OMEGA0 + detuning))
    assert response.I_buildup == pytest.approx(2.4e5, rel=1e-9)


def test_required_power_needs_bus_coupling():
    with pytest.raises(PhysicsDomainError):
        required_power(_params(1.0, 0.6, kappa_c_GHz=0.0), 0.0, 1e5)


def test_scheme_a_single_tone_cancels_vector_shift():
    scheme = elimination_scheme(_params(1.0, 0.8), ZERO_VECTOR_SHIFT_GOAL)
    assert scheme.label == "a"
    assert len(scheme.tones) == 1
    assert abs(scheme.tones[0].I_tilde) <= 1e-9 * scheme.tones[0].I_buildup


def test_scheme_b_matches_vector_buildup():
    scheme = elimination_scheme(_params(1.0, 0.3), ZERO_VECTOR_SHIFT_GOAL)
    plus, minus = scheme.tones
    assert scheme.label == "b"
    assert (plus.port, minus.port) == ("plus", "minus")
    assert plus.I_tilde == pytest.approx(minus.I_tilde, rel=1e-9)
    assert np.sign(plus.detuning) == np.sign(minus.detuning)


def test_scheme_b_infeasible_near_the_boundary():
    with pytest.raises(SchemeInfeasibleError):
        elimination_scheme(_params(1.0, 0.05), ZERO_VECTOR_SHIFT_GOAL)


@pytest.mark.parametrize("goal", [ZERO_LATTICE_GOAL, BOTH_GOAL])
def test_scheme_c_opposite_tones(goal):
    scheme = elimination_scheme(_params(1.0, 0.6), goal)
    plus, minus = scheme.tones
    assert scheme.label == "c"
    assert plus.detuning == pytest.approx(-minus.detuning)
    assert scheme.combined_visibility == pytest.approx(0.0, abs=1e-6)


def test_red_sign_mirrors_detunings():
    red = elimination_scheme(_params(1.0, 0.8), ZERO_VECTOR_SHIFT_GOAL, red_sign=1)
    blue = elimination_scheme(_params(1.0, 0.8), ZERO_VECTOR_SHIFT_GOAL, red_sign=-1)
    assert red.tones[0].detuning == pytest.approx(-blue.tones[0].detuning)


def test_scheme_drive_tones_need_one_power_per_tone():
    params = _params(1.0, 0.6)
    scheme = elimination_scheme(params, ZERO_LATTICE_GOAL)
    tones = scheme_drive_tones(params, scheme, [1e-3, 2e-3])
    assert [t.port for t in tones] == ["plus", "minus"]
    with pytest.raises(ValueError):
        scheme_drive_tones(params, scheme, [1e-3])


def test_close_tones_are_not_incoherent():
    with pytest.raises(PhysicsDomainError):
        ensure_incoherent([OMEGA0, OMEGA0 + TWO_PI * 10e6])
    ensure_incoherent([OMEGA0, OMEGA0, OMEGA0 + TWO_PI * 1e9])


def test_model_spectrum_peak_height():
    params = _params(1.0, 0.6)
    peak = peak_detuning(params)
    counts = model_spectrum(params, 1000.0, 50.0, [OMEGA0 + peak, OMEGA0 - peak, OMEGA0 + 50 * params.kappa])
    assert counts[0] == pytest.approx(1050.0)
    assert counts[1] == pytest.approx(1050.0)
    assert counts[2] == pytest.approx(50.0, abs=1.0)
