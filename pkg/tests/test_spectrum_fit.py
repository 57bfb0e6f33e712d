import numpy as np
import pandas as pd
import pytest
from ringtrap.constants import CONFIG_DIR_PATH
from ringtrap.models.errors import PhysicsDomainError
from ringtrap.models.resonator import ResonatorParams
from ringtrap.physics.resonator import model_spectrum
from ringtrap.physics.spectrum_fit import GHZ, fit_spectrum, fit_summary, read_spectrum

OMEGA0 = 335116.0 * GHZ


def _synthetic(kappa_GHz=1.0, beta_GHz=0.6, noise=5.0, seed=7):
    params = ResonatorParams.from_total_kappa(OMEGA0, kappa_GHz * GHZ, beta_GHz * GHZ)
    omegas = OMEGA0 + np.linspace(-3, 3, 121) * GHZ
    counts = model_spectrum(params, 1200.0, 150.0, omegas)
    counts += np.random.default_rng(seed).normal(0.0, noise, counts.size)
    return omegas, counts


def test_recovers_split_resonance():
    omegas, counts = _synthetic()
    fit = fit_spectrum(omegas, counts)
    assert fit.kappa / GHZ == pytest.approx(1.0, rel=0.03)
    assert fit.beta / GHZ == pytest.approx(0.6, rel=0.03)
    assert (fit.omega0 - OMEGA0) / GHZ == pytest.approx(0.0, abs=0.01)
    assert fit.baseline == pytest.approx(150.0, abs=5.0)
    assert fit.uncertainties["kappa"] > 0


def test_recovers_unsplit_resonance():
    omegas, counts = _synthetic(kappa_GHz=1.0, beta_GHz=0.1, noise=1.0)
    fit = fit_spectrum(omegas, counts)
    assert fit.kappa / GHZ == pytest.approx(1.0, rel=0.05)
    assert fit.beta / GHZ < 0.25


def test_slope_term():
    omegas, counts = _synthetic(noise=0.0)
    counts = counts + 20.0 * (omegas - OMEGA0) / GHZ
    fit = fit_spectrum(omegas, counts, slope=True)
    assert fit.slope * GHZ == pytest.approx(20.0, rel=0.02)
    assert "slope" in fit.parameter_names


def test_flat_spectrum_is_rejected():
    omegas = OMEGA0 + np.linspace(-1, 1, 20) * GHZ
    with pytest.raises(PhysicsDomainError):
        fit_spectrum(omegas, np.full(20, 10.0))


def test_too_few_samples():
    with pytest.raises(PhysicsDomainError):
        fit_spectrum(OMEGA0 + np.arange(3) * GHZ, np.array([1.0, 5.0, 1.0]))


def test_reads_bundled_spectrum():
    df = pd.read_csv(f"{CONFIG_DIR_PATH}/sample_spectrum.csv")
    omegas, counts = read_spectrum(df)
    fit = fit_spectrum(omegas, counts)
    summary = fit_summary(fit)
    assert summary["kappa_over_2pi_GHz"] == pytest.approx(1.0, rel=0.05)
    assert summary["splitting_over_2pi_GHz"] == pytest.approx(1.2, rel=0.05)


def test_missing_columns():
    with pytest.raises(PhysicsDomainError):
        read_spectrum(pd.DataFrame({"frequency_GHz": [1.0]}))
