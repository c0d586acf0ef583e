"""
Tests cho power-law fit J = c·N^(α−1).
"""

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from src.services.errors import FitDomainError, InsufficientDataError
from src.services.fitting import fit_power_law


def test_diffusive_law():
    fit = fit_power_law([(n, 7.0 / n) for n in range(2, 10)])
    assert fit.alpha == pytest.approx(0.0, abs=1e-12)
    assert fit.prefactor == pytest.approx(7.0, rel=1e-12)
    assert abs(fit.regression_coefficient) == pytest.approx(1.0, abs=1e-12)


def test_ballistic_law():
    fit = fit_power_law([(n, 0.119365) for n in range(2, 7)])
    assert fit.alpha == pytest.approx(1.0, abs=1e-12)
    assert fit.slope == pytest.approx(0.0, abs=1e-12)


@given(
    alpha=st.floats(min_value=-1.0, max_value=2.0),
    prefactor=st.floats(min_value=1e-3, max_value=1e3),
)
@hyp_settings(max_examples=50, deadline=None)
def test_recovers_exact_power_laws(alpha, prefactor):
    sizes = np.array([2, 3, 5, 8, 13, 21])
    fit = fit_power_law(zip(sizes, prefactor * sizes ** (alpha - 1.0)))
    assert fit.alpha == pytest.approx(alpha, abs=1e-9)
    assert fit.prefactor == pytest.approx(prefactor, rel=1e-9)
    assert -1.0 <= fit.regression_coefficient <= 1.0
    np.testing.assert_allclose(fit.predict(sizes), prefactor * sizes ** (alpha - 1.0), rtol=1e-9)


def test_too_few_points():
    with pytest.raises(InsufficientDataError):
        fit_power_law([(2, 1.0), (3, 0.5)])


def test_log_domain_errors():
    with pytest.raises(FitDomainError):
        fit_power_law([(2, 1.0), (3, 0.0), (4, 0.2)])
    with pytest.raises(FitDomainError):
        fit_power_law([(2, 1.0), (3, -0.1), (4, 0.2)])
    with pytest.raises(FitDomainError):
        fit_power_law([(1, 1.0), (3, 0.5), (4, 0.2)])
