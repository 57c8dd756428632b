#!/usr/bin/env python3
"""
Koopman-based identification pipeline

    X_lift, Y_lift  ->  U_hat = pinv(X_lift) Y_lift  ->  L_hat = Log(U_hat) / T_s  ->  w_hat

Orientation: snapshots are rows, so the regression reads X_lift @ U_hat ~= Y_lift
and column l of U_hat (and of L_hat) holds the dictionary coefficients of the
image of basis function g_l. For the coordinate observable g_l = x_k, column l
of L_hat is therefore the coefficient vector of f_k, i.e. w_hat[k, j] = L_hat[j, l].
true_generator_matrix builds its matrices in the same orientation.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from .dynamics import DynamicalSystem, SnapshotSet, simulate
from .errors import MissingStateObservable, NotInvariant, ShapeMismatch
from .linalg import Spectrum, lstsq_minnorm, principal_log, spectrum_of
from .observables import Dictionary, LiftedData, Monomial, Rational, lift

logger = logging.getLogger(__name__)

INVARIANT_RESIDUAL = 1e-6
NUMERIC_INVARIANCE_TOL = 1e-8
_DROP = 1e-15


@dataclass(frozen=True)
class KoopmanEstimate:
    U_hat: np.ndarray
    T_s: float
    residual: float
    dictionary: Dictionary

    @property
    def numerically_invariant(self) -> bool:
        return self.residual < INVARIANT_RESIDUAL


@dataclass(frozen=True)
class GeneratorEstimate:
    L_hat: np.ndarray
    spectrum: Spectrum
    T_s: Optional[float]
    dictionary: Dictionary
    provenance: str  # "true" | "identified"

    @property
    def max_abs_imag(self) -> float:
        return self.spectrum.max_abs_imag


@dataclass(frozen=True)
class FieldCoefficients:
    """w[k, j]: coefficient of g_j in f_k"""

    w: np.ndarray
    dictionary: Dictionary

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        return self.dictionary.evaluate(X) @ self.w.T

    def as_field(self) -> Callable[[np.ndarray], np.ndarray]:
        return self.evaluate


@dataclass(frozen=True)
class IdentificationResult:
    koopman: KoopmanEstimate
    generator: GeneratorEstimate
    field: FieldCoefficients


def estimate_koopman(data: LiftedData, rel_tol: Optional[float] = None) -> KoopmanEstimate:
    X, Y = data.X_lift, data.Y_lift
    K, N = X.shape
    if K < N:
        logger.warning(f"Regression has fewer snapshots than basis functions (K={K} < N={N})")
    U = lstsq_minnorm(X, Y, rel_tol)
    y_norm = np.linalg.norm(Y)
    residual = float(np.linalg.norm(X @ U - Y) / (y_norm if y_norm > 0 else 1.0))
    return KoopmanEstimate(U, data.T_s, residual, data.dictionary)


def estimate_generator(estimate: KoopmanEstimate) -> GeneratorEstimate:
    """L_hat = Log(U_hat) / T_s on the principal branch"""
    L = principal_log(estimate.U_hat) / estimate.T_s
    return GeneratorEstimate(L, spectrum_of(L), estimate.T_s, estimate.dictionary, "identified")


def recover_field(generator: GeneratorEstimate) -> FieldCoefficients:
    dictionary = generator.dictionary
    if len(dictionary.state_indices) != dictionary.n or min(dictionary.state_indices, default=-1) < 0:
        raise MissingStateObservable("dictionary does not contain every coordinate observable")
    w = np.stack([generator.L_hat[:, l] for l in dictionary.state_indices])
    return FieldCoefficients(w, dictionary)


def identify(snapshots: SnapshotSet, dictionary: Dictionary, rel_tol: Optional[float] = None) -> IdentificationResult:
    koopman = estimate_koopman(lift(snapshots, dictionary), rel_tol)
    generator = estimate_generator(koopman)
    return IdentificationResult(koopman, generator, recover_field(generator))


def predict(field: FieldCoefficients, x0, horizon: float, rate_hz: float,
            n_samples: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Integrate the identified field f_hat(x) = w_hat g(x) from x0"""
    return simulate(field.evaluate, x0, horizon, rate_hz, n_samples)


# ---------------------------------------------------------------------------
# Ground truth
# ---------------------------------------------------------------------------

def field_coefficients(sys: DynamicalSystem, dictionary: Dictionary) -> FieldCoefficients:
    """Exact coefficients of the true field over a dictionary containing all its terms"""
    _check_dims(sys, dictionary)
    w = np.zeros((sys.dim, len(dictionary)))
    for k in range(sys.dim):
        for coef, exps in sys.poly_terms[k]:
            w[k, _require_index(dictionary, Monomial(exps), k)] += coef
        for coef, l, kk, p in sys.rational_terms[k]:
            w[k, _require_index(dictionary, Rational(sys.dim, l, kk, p), k)] += coef
    return FieldCoefficients(w, dictionary)


def _require_index(dictionary: Dictionary, fn, component: int) -> int:
    idx = dictionary.index_of(fn)
    if idx < 0:
        raise NotInvariant(f"term {fn.label} of f{component + 1} is not in the dictionary",
                           {"component": component, "term": fn.label})
    return idx


def _check_dims(sys: DynamicalSystem, dictionary: Dictionary) -> None:
    if sys.dim != dictionary.n:
        raise ShapeMismatch(f"system '{sys.name}' has dimension {sys.dim}, dictionary expects {dictionary.n}")


def true_generator_matrix(sys: DynamicalSystem, dictionary: Dictionary) -> GeneratorEstimate:
    """
    Exact matrix of L g = f . grad g restricted to span(dictionary).

    Polynomial fields over monomial dictionaries are handled symbolically;
    anything rational is checked numerically on random points.

    Raises:
        NotInvariant: some f . grad g_j leaves the span (context names j)
    """
    _check_dims(sys, dictionary)
    all_monomial = all(isinstance(b, Monomial) for b in dictionary.basis)
    if sys.is_polynomial and all_monomial:
        L = _symbolic_generator(sys, dictionary)
    else:
        L = _numeric_generator(sys, dictionary)
    return GeneratorEstimate(L, spectrum_of(L), None, dictionary, "true")


def _symbolic_generator(sys: DynamicalSystem, dictionary: Dictionary) -> np.ndarray:
    N = len(dictionary)
    L = np.zeros((N, N))
    for j, g in enumerate(dictionary.basis):
        image: Dict[Tuple[int, ...], float] = {}
        for k, s_k in enumerate(g.exponents):
            if s_k == 0:
                continue
            for coef, a in sys.poly_terms[k]:
                exps = tuple(a_i + s_i - (1 if i == k else 0) for i, (a_i, s_i) in enumerate(zip(a, g.exponents)))
                image[exps] = image.get(exps, 0.0) + coef * s_k
        for exps, coef in image.items():
            if abs(coef) <= _DROP:
                continue
            i = dictionary.index_of(Monomial(exps))
            if i < 0:
                raise NotInvariant(f"L {g.label} contains {Monomial(exps).label}, outside the dictionary span",
                                   {"basis_index": j, "basis": g.label})
            L[i, j] += coef
    return L


def _numeric_generator(sys: DynamicalSystem, dictionary: Dictionary, n_points: int = 200) -> np.ndarray:
    rng = np.random.default_rng(0)
    X = rng.uniform(-0.9, 0.9, size=(n_points, sys.dim))
    G = dictionary.evaluate(X)                       # (P, N)
    images = np.einsum("pk,pjk->pj", sys.evaluate(X), dictionary.gradients(X))  # L g_j at each point
    L = lstsq_minnorm(G, images)
    misfit = np.linalg.norm(G @ L - images, axis=0) / np.maximum(np.linalg.norm(images, axis=0), 1.0)
    worst = int(np.argmax(misfit))
    if misfit[worst] > NUMERIC_INVARIANCE_TOL:
        raise NotInvariant(f"L {dictionary.basis[worst].label} leaves the dictionary span (relative misfit {misfit[worst]:.2e})",
                           {"basis_index": worst, "basis": dictionary.basis[worst].label})
    return L


# ---------------------------------------------------------------------------
# Eigenvalue products
# ---------------------------------------------------------------------------

def eigenvalue_lattice(base: Sequence[complex], m: int, max_coefficient: Optional[int] = None) -> np.ndarray:
    """All sums sum_i c_i lambda_i with c_i >= 0, 1 <= sum c_i <= m (and c_i <= max_coefficient)"""
    base = list(base)
    if not base:
        return np.zeros(0, dtype=complex)
    cap = m if max_coefficient is None else min(m, max_coefficient)
    sums = []
    for coeffs in itertools.product(range(cap + 1), repeat=len(base)):
        total = sum(coeffs)
        if 1 <= total <= m:
            sums.append(sum(c * lam for c, lam in zip(coeffs, base)))
    return np.unique(np.round(np.asarray(sums, dtype=complex), 12))


def spectrum_contains_sums(generator: GeneratorEstimate, base: Sequence[complex], tol: float = 1e-5,
                           m: Optional[int] = None) -> bool:
    """Every sum c1 lambda1 + c2 lambda2 + ... (c_i in {0,1,2}, sum c_i <= m) lies in sigma(L)"""
    if not list(base):
        return True
    m = generator.dictionary.degree if m is None else m
    spectrum = generator.spectrum.as_array()
    targets = eigenvalue_lattice(base, m, max_coefficient=2)
    return all(np.min(np.abs(spectrum - t)) <= tol for t in targets)
