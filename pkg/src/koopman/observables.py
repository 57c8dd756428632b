#!/usr/bin/env python3
"""
Observable dictionaries and data lifting

A Dictionary is an ordered basis of monomials x1^s1...xn^sn and rational
functions x_l / (1 + x_k^p). Monomials come in graded lexicographic order
(degree first, then exponent vectors in descending lexicographic order, so x1
precedes x2); rational terms follow, ordered by (p, k, l).

Labels are the text form of a basis function and round-trip through
parse_basis: "1", "x1", "x1^2*x2", "x2/(1+x2^2)". Label indices are 1-based.
"""

import itertools
import logging
import re
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .dynamics import POLE_TOL, SnapshotSet
from .errors import ConfigError, DuplicateBasis, MissingStateObservable, PoleHit, ShapeMismatch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Monomial:
    exponents: Tuple[int, ...]

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    @property
    def label(self) -> str:
        factors = []
        for i, e in enumerate(self.exponents):
            if e == 1:
                factors.append(f"x{i + 1}")
            elif e > 1:
                factors.append(f"x{i + 1}^{e}")
        return "*".join(factors) or "1"

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        return np.prod(X ** np.asarray(self.exponents), axis=1)

    def gradient(self, X: np.ndarray) -> np.ndarray:
        K, n = X.shape
        grad = np.zeros((K, n))
        for j, e in enumerate(self.exponents):
            if e == 0:
                continue
            reduced = np.array(self.exponents)
            reduced[j] -= 1
            grad[:, j] = e * np.prod(X ** reduced, axis=1)
        return grad


@dataclass(frozen=True)
class Rational:
    """x_l / (1 + x_k^p), 0-based l and k"""

    n: int
    l: int
    k: int
    p: int

    def __post_init__(self):
        if self.p < 1 or not (0 <= self.l < self.n and 0 <= self.k < self.n):
            raise ConfigError(f"invalid rational basis function l={self.l + 1}, k={self.k + 1}, p={self.p}")

    @property
    def label(self) -> str:
        power = f"^{self.p}" if self.p > 1 else ""
        return f"x{self.l + 1}/(1+x{self.k + 1}{power})"

    def _denominator(self, X: np.ndarray) -> np.ndarray:
        den = 1.0 + X[:, self.k] ** self.p
        bad = np.abs(den) < POLE_TOL
        if np.any(bad):
            raise PoleHit(f"{self.label} has a pole", {"point": int(np.argmax(bad))})
        return den

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        return X[:, self.l] / self._denominator(X)

    def gradient(self, X: np.ndarray) -> np.ndarray:
        den = self._denominator(X)
        grad = np.zeros_like(X, dtype=float)
        grad[:, self.l] += 1.0 / den
        grad[:, self.k] -= X[:, self.l] * self.p * X[:, self.k] ** (self.p - 1) / den ** 2
        return grad


BasisFn = Union[Monomial, Rational]

_MONO_FACTOR = re.compile(r"^x(\d+)(?:\^(\d+))?$")
_RATIONAL = re.compile(r"^x(\d+)/\(1\+x(\d+)(?:\^(\d+))?\)$")


def parse_basis(label: str, n: int) -> BasisFn:
    """Parse a basis label for an n-dimensional state"""
    text = label.replace(" ", "")
    match = _RATIONAL.match(text)
    if match:
        l, k = int(match.group(1)), int(match.group(2))
        p = int(match.group(3) or 1)
        if not (1 <= l <= n and 1 <= k <= n):
            raise ConfigError(f"basis '{label}' refers to a coordinate outside 1..{n}")
        return Rational(n, l - 1, k - 1, p)
    if text == "1":
        return Monomial((0,) * n)
    exps = [0] * n
    for factor in text.split("*"):
        match = _MONO_FACTOR.match(factor)
        if not match:
            raise ConfigError(f"cannot parse basis function '{label}'")
        idx = int(match.group(1))
        if not 1 <= idx <= n:
            raise ConfigError(f"basis '{label}' refers to x{idx}, state has dimension {n}")
        exps[idx - 1] += int(match.group(2) or 1)
    return Monomial(tuple(exps))


def coordinate(n: int, k: int) -> Monomial:
    exps = [0] * n
    exps[k] = 1
    return Monomial(tuple(exps))


@dataclass(frozen=True)
class Dictionary:
    n: int
    basis: Tuple[BasisFn, ...]
    state_indices: Tuple[int, ...]
    degree: int
    rational_cap: Optional[int] = None

    def __len__(self) -> int:
        return len(self.basis)

    @property
    def labels(self) -> List[str]:
        return [b.label for b in self.basis]

    @property
    def label(self) -> str:
        if self.rational_cap is not None:
            return f"m={self.degree},P={self.rational_cap}"
        return f"m={self.degree}" if self._is_graded() else "{" + ",".join(self.labels) + "}"

    def _is_graded(self) -> bool:
        return self.basis == build_dictionary(self.n, self.degree, self._has_constant()).basis

    def _has_constant(self) -> bool:
        return Monomial((0,) * self.n) in self.basis

    def index_of(self, fn: BasisFn) -> int:
        try:
            return self.basis.index(fn)
        except ValueError:
            return -1

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        """Dictionary at a batch of states (K x n) -> (K x N)"""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n:
            raise ShapeMismatch(f"states have {X.shape[1]} coordinates, dictionary expects {self.n}")
        return np.column_stack([b.evaluate(X) for b in self.basis])

    def gradients(self, X: np.ndarray) -> np.ndarray:
        """Basis gradients at a batch of states -> (K x N x n)"""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.stack([b.gradient(X) for b in self.basis], axis=1)


def _graded_monomials(n: int, m: int, include_constant: bool) -> List[Monomial]:
    exps = []
    for d in range(0 if include_constant else 1, m + 1):
        for combo in itertools.combinations_with_replacement(range(n), d):
            e = [0] * n
            for i in combo:
                e[i] += 1
            exps.append(tuple(e))
    exps.sort(key=lambda e: (sum(e), tuple(-v for v in e)))
    return [Monomial(e) for e in exps]


def build_dictionary(n: int, m: int, include_constant: bool = False,
                     rational_cap: Optional[int] = None) -> Dictionary:
    """
    Monomials of total degree <= m plus, when rational_cap P is given, every
    x_l / (1 + x_k^p) with l, k in 1..n and p in 1..P (l = k included).
    """
    if n < 1 or m < 1:
        raise ConfigError(f"dictionary needs n >= 1 and m >= 1, got n={n}, m={m}")
    basis: List[BasisFn] = list(_graded_monomials(n, m, include_constant))
    if rational_cap is not None:
        if rational_cap < 1:
            raise ConfigError(f"rational power cap must be >= 1, got {rational_cap}")
        for p in range(1, rational_cap + 1):
            for k in range(n):
                for l in range(n):
                    basis.append(Rational(n, l, k, p))
    state_indices = tuple(basis.index(coordinate(n, k)) for k in range(n))
    return Dictionary(n, tuple(basis), state_indices, m, rational_cap)


def custom_dictionary(basis: Iterable[Union[BasisFn, str]], n: Optional[int] = None) -> Dictionary:
    """Dictionary with a caller-chosen order; labels need n"""
    items = list(basis)
    if n is None:
        first = next((b for b in items if isinstance(b, Monomial)), None)
        if first is None:
            raise ConfigError("state dimension n is required for a label-only or rational-only basis")
        n = len(first.exponents)
    fns: List[BasisFn] = [parse_basis(b, n) if isinstance(b, str) else b for b in items]

    seen = set()
    for fn in fns:
        if fn in seen:
            raise DuplicateBasis(f"basis function {fn.label} appears more than once")
        seen.add(fn)

    state_indices = []
    for k in range(n):
        idx = fns.index(coordinate(n, k)) if coordinate(n, k) in seen else -1
        if idx < 0:
            raise MissingStateObservable(f"dictionary lacks the coordinate observable x{k + 1}")
        state_indices.append(idx)

    degree = max((fn.degree for fn in fns if isinstance(fn, Monomial)), default=1)
    caps = [fn.p for fn in fns if isinstance(fn, Rational)]
    return Dictionary(n, tuple(fns), tuple(state_indices), degree, max(caps) if caps else None)


def evaluate_dictionary(dictionary: Dictionary, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    return dictionary.evaluate(x[None, :])[0]


@dataclass(frozen=True)
class LiftedData:
    X_lift: np.ndarray
    Y_lift: np.ndarray
    T_s: float
    dictionary: Dictionary


def lift(snapshots: SnapshotSet, dictionary: Dictionary) -> LiftedData:
    """Rows of X_lift / Y_lift are the dictionary at x_pre / x_post of each pair"""
    if len(snapshots) < 1:
        raise ConfigError("cannot lift an empty snapshot set")
    try:
        X = dictionary.evaluate(snapshots.x_pre)
        Y = dictionary.evaluate(snapshots.x_post)
    except PoleHit as e:
        pair = e.context.get("point")
        raise PoleHit(f"pair {pair}: {e}", {"pair": pair})
    return LiftedData(X, Y, snapshots.T_s, dictionary)


def gradient_matrix(dictionary: Dictionary, points, coefficients: Optional[Sequence[Sequence[float]]] = None) -> np.ndarray:
    """
    Gradients of phi_i = sum_j c_ij g_j at each sample point.

    Args:
        coefficients: (n_funcs x N) rows of dictionary coordinates; defaults to
            the dictionary's own basis functions

    Returns:
        Array (P, n_funcs, n) with entry [p, i, j] = d phi_i / d x_j at point p
    """
    grads = dictionary.gradients(points)  # (P, N, n)
    if coefficients is None:
        return grads
    C = np.atleast_2d(np.asarray(coefficients, dtype=float))
    if C.shape[1] != len(dictionary):
        raise ShapeMismatch(f"coefficients have {C.shape[1]} columns, dictionary has {len(dictionary)} functions")
    return np.einsum("ij,pjk->pik", C, grads)
