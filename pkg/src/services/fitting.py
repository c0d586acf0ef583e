"""
Power-law fit J = c·N^(α−1) bằng linear regression trên (ln N, ln J).

slope = α − 1, prefactor c = exp(intercept), R là Pearson regression
coefficient của log-log data.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.stats import linregress

from src.services.errors import FitDomainError, InsufficientDataError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PowerLawFit:
    alpha: float
    prefactor: float
    regression_coefficient: float
    n_points: int

    @property
    def slope(self) -> float:
        return self.alpha - 1.0

    @property
    def r_squared(self) -> float:
        return self.regression_coefficient ** 2

    def predict(self, n) -> np.ndarray:
        return self.prefactor * np.asarray(n, dtype=float) ** self.slope


def fit_power_law(points: Iterable[tuple[float, float]]) -> PowerLawFit:
    """
    Fit power law từ list (N, J)

    Raises:
        InsufficientDataError: ít hơn 3 điểm
        FitDomainError: J ≤ 0 hoặc N < 2
    """
    data = np.asarray(list(points), dtype=float)
    if data.ndim != 2 or data.shape[0] < 3:
        raise InsufficientDataError(f"power-law fit needs at least 3 points, got {len(data)}")
    sizes, currents = data[:, 0], data[:, 1]
    if np.any(currents <= 0) or not np.all(np.isfinite(currents)):
        raise FitDomainError("power-law fit needs strictly positive currents")
    if np.any(sizes < 2):
        raise FitDomainError("power-law fit needs chain sizes N >= 2")
    result = linregress(np.log(sizes), np.log(currents))
    fit = PowerLawFit(
        alpha=float(result.slope + 1.0),
        prefactor=float(np.exp(result.intercept)),
        regression_coefficient=float(result.rvalue),
        n_points=len(sizes),
    )
    logger.info("power-law fit over %d points: alpha=%.4f R=%.7f", fit.n_points, fit.alpha, fit.regression_coefficient)
    return fit
