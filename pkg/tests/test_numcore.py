import numpy as np
import pytest

from unlearn_forge.numcore import (
    RngStream,
    derive_stream,
    kaiming_sample,
    axpy_merge,
    as_params,
    check_finite,
)


def test_same_key_same_bits():
    a = derive_stream(42, 7).standard_normal(1000)
    b = derive_stream(42, 7).standard_normal(1000)
    assert np.array_equal(a, b)


def test_distinct_streams_differ():
    a = derive_stream(42, 7).standard_normal(1000)
    b = derive_stream(42, 8).standard_normal(1000)
    assert not np.array_equal(a, b)


def test_negative_key_rejected():
    with pytest.raises(ValueError):
        RngStream(-1, 0)
    with pytest.raises(ValueError):
        RngStream(0, -3)


def test_kaiming_variance():
    d = 400
    draws = np.stack([kaiming_sample(d, derive_stream(s, 0)) for s in range(200)])
    assert abs(draws.var() - 2.0 / d) < 0.05 * (2.0 / d)
    assert abs(draws.mean()) < 3.0 * np.sqrt(2.0 / d / draws.size)


def test_kaiming_bad_dim():
    with pytest.raises(ValueError):
        kaiming_sample(0, derive_stream(0, 0))


def test_axpy_merge():
    x, y = np.array([1.0, 2.0]), np.array([3.0, -1.0])
    assert np.allclose(axpy_merge(2.0, x, -1.0, y), [-1.0, 5.0])
    with pytest.raises(ValueError):
        axpy_merge(1.0, x, 1.0, np.zeros(3))


def test_as_params_rejects_nan():
    with pytest.raises(FloatingPointError):
        as_params([1.0, np.nan])
    out = as_params([[1, 2], [3, 4]])
    assert out.shape == (4,) and out.dtype == np.float64


def test_check_finite_message():
    with pytest.raises(FloatingPointError, match="gradient"):
        check_finite(np.array([np.inf]), "gradient")


def test_uniform_range():
    u = derive_stream(0, 1).uniform(2.0, 5.0, size=1000)
    assert u.min() >= 2.0 and u.max() < 5.0
