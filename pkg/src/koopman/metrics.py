#!/usr/bin/env python3
"""
Identification error measures

NRMSE over field coefficients and the DFT spectral error of reconstructed
state trajectories.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .dynamics import DynamicalSystem, simulate
from .errors import AllZeroTruth, Divergence, ShapeMismatch
from .identification import FieldCoefficients

logger = logging.getLogger(__name__)

NONZERO_TOL = 1e-12
DEFAULT_RATE_HZ = 100.0
DEFAULT_SAMPLES = 500
DEFAULT_X0 = (0.5, 0.5)

SWEEP_COLUMNS = ("T_s", "nrmse", "nrmse_quarter", "max_abs_imag", "residual", "dictionary",
                 "beyond_critical", "status")


@dataclass(frozen=True)
class SweepRow:
    T_s: float
    nrmse: float
    nrmse_quarter: float
    max_abs_imag: float
    residual: float
    dictionary: str
    beyond_critical: bool = False
    status: str = "ok"

    @classmethod
    def failed(cls, T_s: float, dictionary: str, status: str, beyond_critical: bool = False) -> "SweepRow":
        nan = float("nan")
        return cls(T_s, nan, nan, nan, nan, dictionary, beyond_critical, status)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict:
        return asdict(self)


def _coefficients(w) -> np.ndarray:
    return np.asarray(w.w if isinstance(w, FieldCoefficients) else w, dtype=float)


def rmse(w_hat, w_true) -> float:
    W_hat, W = _coefficients(w_hat), _coefficients(w_true)
    if W_hat.shape != W.shape:
        raise ShapeMismatch(f"coefficient shapes differ: {W_hat.shape} vs {W.shape}")
    return float(np.sqrt(np.mean((W_hat - W) ** 2)))


def nrmse(w_hat, w_true) -> float:
    """
    RMSE divided by the mean magnitude of the nonzero true coefficients.

    Raises:
        AllZeroTruth: no true coefficient exceeds 1e-12 in magnitude
        ShapeMismatch: coefficient matrices differ in shape
    """
    W = _coefficients(w_true)
    nonzero = np.abs(W) > NONZERO_TOL
    if not np.any(nonzero):
        raise AllZeroTruth("true coefficients are all zero; NRMSE undefined")
    error = rmse(w_hat, W)
    scale = float(np.sum(np.abs(W)) / np.count_nonzero(nonzero))
    return error / scale


def dft(signal: Sequence[float]) -> np.ndarray:
    """Unnormalized forward DFT, P[q] = sum_s x[s] exp(-2 pi i q s / len)"""
    x = np.asarray(signal)
    if x.size < 1:
        raise ShapeMismatch("DFT of an empty signal")
    return np.fft.fft(x)


def spectral_error(sys_true: DynamicalSystem, w_hat: FieldCoefficients, x0=DEFAULT_X0,
                   fs: float = DEFAULT_RATE_HZ, n_samples: int = DEFAULT_SAMPLES,
                   truth: Optional[np.ndarray] = None) -> np.ndarray:
    """
    ||P_hat_k - P_k||_2^2 for every state k between true and identified
    trajectories from x0, both sampled at fs for n_samples points.

    An identified field that diverges inside the window scores +inf.

    Args:
        truth: precomputed true states (n_samples x n), reused across a sweep
    """
    if truth is None:
        _, truth = simulate(sys_true.evaluate, x0, 0.0, fs, n_samples)
    try:
        _, predicted = simulate(w_hat.evaluate, x0, 0.0, fs, n_samples)
    except Divergence as e:
        logger.warning(f"Identified field diverged during spectral comparison: {e}")
        return np.full(sys_true.dim, math.inf)
    return np.sum(np.abs(dft(predicted.T) - dft(truth.T)) ** 2, axis=1)
