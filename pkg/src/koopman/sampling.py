#!/usr/bin/env python3
"""
Critical sampling period and generator aliasing

For a generator L with spectrum sigma(L) the discrete Koopman matrix
exp(L T_s) determines L uniquely on the principal branch iff every eigenvalue
lies in the open strip |Im z| < pi / T_s. The critical period is therefore
T_gamma = pi / max|Im sigma(L)| (infinite for a real spectrum), and above it
shifting a conjugate pair by 2 pi n / T_s yields a different real generator
with the same exponential.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ConfigError, Defective, RealEigenvalue, ShapeMismatch
from .linalg import Spectrum, as_square, eigendecompose, mat_exp, spectrum_of

logger = logging.getLogger(__name__)

DEFECTIVE_COND = 1e8
ALIAS_SPACE_TOL = 1e-12
PAIR_IMAG_TOL = 1e-12
MIN_SINGULAR = 1e-8

SpectrumLike = Union[Spectrum, Sequence[complex]]


@dataclass(frozen=True)
class SamplingVerdict:
    max_abs_imag: float
    T_gamma: float
    min_frequency: float
    no_aliasing_at: Optional[Tuple[float, bool]] = None
    spectrum: Optional[Spectrum] = None

    def to_dict(self) -> dict:
        data = {
            "max_abs_imag": self.max_abs_imag,
            "T_gamma": self.T_gamma,
            "min_frequency": self.min_frequency,
        }
        if self.no_aliasing_at is not None:
            data["T_s"], data["no_aliasing"] = self.no_aliasing_at
        if self.spectrum is not None:
            data["spectrum"] = [str(v) for v in self.spectrum.eigenvalues]
        return data


def _as_spectrum(spectrum: SpectrumLike) -> Spectrum:
    return spectrum if isinstance(spectrum, Spectrum) else Spectrum.from_values(spectrum)


def critical_period(spectrum: SpectrumLike, T_s: Optional[float] = None) -> SamplingVerdict:
    spectrum = _as_spectrum(spectrum)
    if len(spectrum) == 0:
        raise ShapeMismatch("critical period of an empty spectrum is undefined")
    w = spectrum.max_abs_imag
    T_gamma = math.pi / w if w > 0 else math.inf
    verdict = None
    if T_s is not None:
        if T_s <= 0:
            raise ConfigError(f"sampling period must be positive, got {T_s}")
        verdict = (float(T_s), bool(w < math.pi / T_s))
    return SamplingVerdict(w, T_gamma, 2.0 * w, verdict, spectrum)


def max_critical_period(spectra: Iterable[SpectrumLike], T_s: Optional[float] = None) -> SamplingVerdict:
    """Largest T_gamma over candidate eigenspaces"""
    verdicts = [critical_period(s, T_s) for s in spectra]
    if not verdicts:
        raise ShapeMismatch("no candidate spectra supplied")
    return max(verdicts, key=lambda v: v.T_gamma)


def in_strip(L, T_s: float) -> bool:
    """Every eigenvalue satisfies |Im lambda| < pi / T_s (open strip)"""
    if T_s <= 0:
        raise ConfigError(f"sampling period must be positive, got {T_s}")
    return spectrum_of(L).max_abs_imag < math.pi / T_s


def wrapped_imag(imag: float, T_s: float) -> float:
    """Imaginary part recovered by the principal logarithm at period T_s"""
    period = 2.0 * math.pi / T_s
    return imag - period * round(imag / period)


def in_alias_space(L_candidate, L_true) -> bool:
    A = as_square(L_candidate, "candidate generator")
    B = as_square(L_true, "true generator")
    if A.shape != B.shape:
        raise ShapeMismatch(f"generators differ in size: {A.shape} vs {B.shape}")
    return spectrum_of(A).max_abs_imag <= spectrum_of(B).max_abs_imag + ALIAS_SPACE_TOL


@dataclass(frozen=True)
class AliasCertificate:
    L_true: np.ndarray
    L_alias: np.ndarray
    T_s: float
    branch_shifts: Tuple[int, ...]
    exp_gap: float
    in_alias_space: bool

    @property
    def is_identity(self) -> bool:
        return not any(self.branch_shifts)

    def to_dict(self) -> dict:
        return {
            "T_s": self.T_s,
            "branch_shifts": list(self.branch_shifts),
            "exp_gap": self.exp_gap,
            "in_alias_space": self.in_alias_space,
            "alias_spectrum": [str(v) for v in spectrum_of(self.L_alias).eigenvalues],
            "L_alias": self.L_alias.tolist(),
        }


def _pair_structure(L: np.ndarray) -> Tuple[np.ndarray, np.ndarray, List[Tuple[int, int]]]:
    spectrum, V = eigendecompose(L)
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond >= DEFECTIVE_COND:
        raise Defective(f"eigenvector matrix is ill-conditioned (cond {cond:.3e})", {"condition": float(cond)})
    vals = spectrum.as_array()
    pairs = []
    used = set()
    for i in np.flatnonzero(vals.imag > PAIR_IMAG_TOL):
        candidates = [j for j in np.flatnonzero(vals.imag < -PAIR_IMAG_TOL) if j not in used]
        j = min(candidates, key=lambda c: abs(vals[c] - np.conj(vals[i])))
        used.add(j)
        pairs.append((int(i), int(j)))
    return vals, V, pairs


def construct_alias(L, T_s: float, shifts: Sequence[int]) -> AliasCertificate:
    """
    Real generator alias obtained by moving conjugate pair k by 2 pi n_k / T_s.

    Args:
        shifts: one integer per conjugate pair, pairs taken in spectrum order
            of their positive-imaginary member; missing entries are zero

    Raises:
        Defective: eigenvector condition number >= 1e8
        RealEigenvalue: a nonzero shift beyond the conjugate pairs
    """
    L = np.asarray(as_square(L, "generator"), dtype=float)
    vals, V, pairs = _pair_structure(L)
    shifts = [int(s) for s in shifts]
    if any(shifts[len(pairs):]):
        raise RealEigenvalue(f"{len(pairs)} conjugate pair(s) available; shifts {shifts} would move a real eigenvalue")
    shifts = (shifts + [0] * len(pairs))[:len(pairs)]

    new_vals = vals.copy()
    step = 2.0 * math.pi / T_s
    for (i, j), n_k in zip(pairs, shifts):
        new_vals[i] += 1j * step * n_k
        new_vals[j] -= 1j * step * n_k

    if any(shifts):
        assembled = V @ np.diag(new_vals) @ np.linalg.inv(V)
        L_alias = assembled.real
    else:
        L_alias = L.copy()

    E = mat_exp(L, T_s)
    gap = float(np.linalg.norm(E - mat_exp(L_alias, T_s)) / np.linalg.norm(E))
    return AliasCertificate(L, L_alias, float(T_s), tuple(shifts), gap, in_alias_space(L_alias, L))


def enumerate_aliases(L, T_s: float, max_count: int = 64) -> List[AliasCertificate]:
    """
    Every pair-shift combination that keeps all |Im lambda| within
    max|Im sigma(L)|, in lexicographic shift order, at most max_count.
    """
    L = np.asarray(as_square(L, "generator"), dtype=float)
    vals, _, pairs = _pair_structure(L)
    bound = float(np.max(np.abs(vals.imag))) if vals.size else 0.0
    step = 2.0 * math.pi / T_s

    ranges = []
    for i, _ in pairs:
        b = vals[i].imag
        lo = math.ceil((-bound - b) / step - ALIAS_SPACE_TOL)
        hi = math.floor((bound - b) / step + ALIAS_SPACE_TOL)
        ranges.append(range(lo, hi + 1))

    aliases = []
    for combo in itertools.product(*ranges):
        if len(aliases) >= max_count:
            logger.info(f"Alias enumeration truncated at {max_count} members")
            break
        aliases.append(construct_alias(L, T_s, combo))
    return aliases


@dataclass(frozen=True)
class EigenspaceValidity:
    valid: bool
    worst_condition: float
    min_singular: float


def validate_eigenspace(gradients) -> EigenspaceValidity:
    """Gradients (P x n x n) must be nonsingular at every sample point"""
    G = np.asarray(gradients, dtype=float)
    if G.ndim == 2:
        G = G[None]
    if G.ndim != 3 or G.shape[1] != G.shape[2]:
        raise ShapeMismatch(f"expected (points, n, n) gradient stack, got shape {G.shape}")
    s = np.linalg.svd(G, compute_uv=False)  # (P, n), descending
    smallest = s[:, -1]
    with np.errstate(divide="ignore"):
        cond = np.where(smallest > 0, s[:, 0] / np.where(smallest > 0, smallest, 1.0), np.inf)
    return EigenspaceValidity(bool(np.all(smallest > MIN_SINGULAR)), float(np.max(cond)), float(np.min(smallest)))


def nyquist_comparison(omega: float, a: float = 0.0) -> dict:
    """
    Rod with angular velocity omega and radial rate a: the critical-period bound
    2|omega| agrees with the Nyquist bound when the states are band-limited (a = 0).
    """
    critical = 2.0 * abs(omega)
    band_limited = a == 0.0
    return {
        "critical_min_frequency": critical,
        "nyquist_min_frequency": critical if band_limited else None,
        "band_limited": band_limited,
        "consistent": band_limited,
    }
