#!/usr/bin/env python3
"""
Dense matrix kernels

Eigendecomposition with a fixed eigenvalue ordering, matrix exponential,
principal matrix logarithm and minimum-norm least squares. Matrices are plain
numpy arrays; every function is pure and leaves its inputs untouched.

The principal logarithm delegates to scipy.linalg.logm, which works on the
complex Schur form with inverse scaling-and-squaring and Pade approximants, so
defective matrices are handled where a bare eigendecomposition would fail.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg as sla

from config.settings import Config
from .errors import BranchCut, ComplexLogarithm, NonFinite, ShapeMismatch, Singular

logger = logging.getLogger(__name__)

# |lambda| below this fraction of the spectral radius counts as a zero eigenvalue
SINGULAR_REL_TOL = 1e-13
# largest imaginary part, relative to max(1, ||Log M||), accepted for a real input
LOG_IMAG_TOL = 1e-12


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted by descending real part, ties by ascending imaginary part"""

    eigenvalues: Tuple[complex, ...]

    @property
    def max_abs_imag(self) -> float:
        if not self.eigenvalues:
            return 0.0
        return float(np.max(np.abs(np.imag(self.eigenvalues))))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.eigenvalues, dtype=complex)

    def __len__(self) -> int:
        return len(self.eigenvalues)

    @classmethod
    def from_values(cls, values) -> "Spectrum":
        vals = np.asarray(values, dtype=complex).ravel()
        return cls(tuple(complex(v) for v in vals[_spectrum_order(vals)]))


def _spectrum_order(vals: np.ndarray) -> np.ndarray:
    # rounding keeps conjugate pairs adjacent despite last-bit differences
    real_key = np.round(vals.real, 12)
    return np.lexsort((vals.imag, -real_key))


def as_square(A, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(A)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeMismatch(f"{name} must be square, got shape {arr.shape}")
    check_finite(arr, name)
    return arr


def check_finite(arr: np.ndarray, name: str = "matrix") -> None:
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"{name} contains NaN or Inf entries")


def eigendecompose(A) -> Tuple[Spectrum, np.ndarray]:
    """
    Eigenvalues and right eigenvectors of a square matrix.

    Returns:
        Tuple of (Spectrum, V) with the columns of V in spectrum order, so
        that A @ V ~= V @ diag(eigenvalues)
    """
    A = as_square(A)
    vals, vecs = sla.eig(A)
    order = _spectrum_order(vals)
    vals = vals[order]
    vecs = vecs[:, order]
    return Spectrum(tuple(complex(v) for v in vals)), vecs


def spectrum_of(A) -> Spectrum:
    A = as_square(A)
    return Spectrum.from_values(sla.eigvals(A))


def mat_exp(A, t: float = 1.0) -> np.ndarray:
    """exp(A t)"""
    A = as_square(A)
    if not np.isfinite(t):
        raise NonFinite(f"time {t} is not finite")
    result = sla.expm(A * t)
    check_finite(result, "exp(A t)")
    return result


def principal_log(M) -> np.ndarray:
    """
    Principal matrix logarithm.

    The eigenvalues of the result lie in the open strip -pi < Im z < pi. For a
    real input the result is real.

    Raises:
        Singular: zero eigenvalue
        BranchCut: eigenvalue within Config.BRANCH_CUT_TOL of (-inf, 0]
        ComplexLogarithm: imaginary part of the result above LOG_IMAG_TOL
        NonFinite: NaN/Inf input
    """
    M = as_square(M)
    spectrum, vecs = eigendecompose(M)
    vals = spectrum.as_array()
    radius = float(np.max(np.abs(vals))) if vals.size else 0.0

    if vals.size and (radius == 0.0 or np.any(np.abs(vals) <= SINGULAR_REL_TOL * radius)):
        raise Singular("matrix has a zero eigenvalue, no logarithm exists",
                       {"spectral_radius": radius})

    on_cut = (vals.real < 0) & (np.abs(vals.imag) <= Config.BRANCH_CUT_TOL * np.maximum(1.0, np.abs(vals)))
    if np.any(on_cut):
        offending = [complex(v) for v in vals[on_cut]]
        raise BranchCut(f"eigenvalues on the negative real axis: {offending}",
                        {"eigenvalues": [str(v) for v in offending]})

    cond = np.linalg.cond(vecs)
    if not np.isfinite(cond) or cond > Config.EIG_COND_WARN:
        logger.warning(f"Nearly defective matrix, eigenvector condition number {cond:.3e}")

    B = sla.logm(M)
    if np.isrealobj(M) and np.iscomplexobj(B):
        leak = imag_leak(B)
        if leak >= LOG_IMAG_TOL:
            raise ComplexLogarithm(f"logarithm of a real matrix has imaginary part {leak:.3e} (relative)",
                                   {"imag_leak": leak, "condition": float(cond)})
        B = B.real
    check_finite(B, "Log(M)")
    return np.asarray(B)


def imag_leak(B) -> float:
    """max|Im B| relative to max(1, ||B||_F)"""
    B = np.asarray(B)
    if not np.iscomplexobj(B) or B.size == 0:
        return 0.0
    return float(np.max(np.abs(B.imag)) / max(1.0, np.linalg.norm(B)))


def default_pinv_rtol(K: int, N: int) -> float:
    return Config.PINV_RTOL_FACTOR * max(K, N)


def lstsq_minnorm(X, Y, rel_tol: Optional[float] = None) -> np.ndarray:
    """
    Minimum-norm least-squares solution of X @ U ~= Y.

    Singular values of X below rel_tol * sigma_max are discarded. The default
    rel_tol is Config.PINV_RTOL_FACTOR * max(K, N).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if X.shape[0] != Y.shape[0]:
        raise ShapeMismatch(f"row counts differ: X has {X.shape[0]}, Y has {Y.shape[0]}")
    check_finite(X, "X")
    check_finite(Y, "Y")

    K, N = X.shape
    if rel_tol is None:
        rel_tol = default_pinv_rtol(K, N)

    U, s, Vt = sla.svd(X, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((N, Y.shape[1]))
    keep = s > rel_tol * s[0]
    coeffs = (U[:, keep].T @ Y) / s[keep][:, None]
    return Vt[keep].T @ coeffs
