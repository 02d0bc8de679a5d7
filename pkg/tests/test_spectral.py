import numpy as np
import pytest

from unlearn_forge.models import make_quadratic, make_classifier, mlp_spec
from unlearn_forge.numcore import derive_stream
from unlearn_forge.spectral import (
    lambda_max,
    lambda_min,
    condition_number,
    estimate_spectrum,
    NON_PSD_DIAGNOSTIC,
)


def test_known_spectrum_extremes():
    obj = make_quadratic([4.0, 2.0, 1.0], np.zeros(3), 0.0)
    rng = derive_stream(0, 0)
    lam_top, _ = lambda_max(obj, np.zeros(3), rng=rng)
    assert lam_top == pytest.approx(4.0, rel=1e-8)
    lam, psd, _ = lambda_min(obj, np.zeros(3), lam_top, rng=rng)
    assert lam == pytest.approx(1.0, rel=1e-8)
    assert psd


def test_isotropic_degenerate_case():
    obj = make_quadratic([3.0, 3.0, 3.0], np.zeros(3), 0.0)
    est = estimate_spectrum(obj, np.zeros(3), rng=derive_stream(1, 0))
    assert est.lambda_max == pytest.approx(3.0, rel=1e-10)
    assert est.lambda_min == pytest.approx(3.0, rel=1e-10)
    assert est.kappa == pytest.approx(1.0, rel=1e-9)


def test_estimate_full_report():
    obj = make_quadratic([10.0, 5.0, 2.0, 1.0], np.zeros(4), 0.0)
    est = estimate_spectrum(obj, np.zeros(4), rng=derive_stream(2, 0))
    assert est.psd_flag
    assert est.kappa == est.lambda_max / est.lambda_min
    assert est.residual < 1e-8
    d = est.to_dict()
    assert set(d) >= {"lambda_max", "lambda_min", "kappa", "psd_flag"}


def test_non_psd_diagnostic():
    # a saturated relu network at a random point routinely has an
    # indefinite Hessian; force one with a rank-deficient toy instead
    spec = mlp_spec([2, 4, 2], activation="tanh")
    rng = derive_stream(3, 0)
    X = rng.normal(1.0, 40).reshape(20, 2)
    y = rng.integers(2, size=20)
    obj = make_classifier(spec, X, y)
    theta = rng.normal(2.0, spec.param_count)
    est = estimate_spectrum(obj, theta, rng=rng)
    if not est.psd_flag:
        assert condition_number(est) == NON_PSD_DIAGNOSTIC
    else:  # fall back: the diagnostic path must still trigger on a forged estimate
        forged = type(est)(lambda_max=est.lambda_max, lambda_min=-1.0, kappa=None,
                           iterations_used=1, residual=0.0, psd_flag=False)
        assert condition_number(forged) == NON_PSD_DIAGNOSTIC


def test_tiny_lambda_min_floor():
    obj = make_quadratic([1.0, 1e-15], np.zeros(2), 0.0)
    est = estimate_spectrum(obj, np.zeros(2), rng=derive_stream(4, 0))
    assert isinstance(condition_number(est), str)


def test_power_iteration_rayleigh_accuracy():
    rng = derive_stream(5, 0)
    spectrum = np.sort(rng.uniform(0.5, 20.0, 16))[::-1]
    spectrum[0] = spectrum[1] * 1.5  # clear top gap
    obj = make_quadratic(spectrum, np.zeros(16), 0.0)
    est = estimate_spectrum(obj, np.zeros(16), rng=rng)
    assert est.lambda_max == pytest.approx(spectrum[0], rel=1e-7)
    assert est.lambda_min == pytest.approx(spectrum[-1], rel=1e-7)
