#!/usr/bin/env python3
"""
Benchmark vector fields, flow map and snapshot sampling

A DynamicalSystem is a vector field over R^n written as a sum of polynomial
terms c * x^s and rational terms c * x_l / (1 + x_k^p). Builtin systems cover
the rotating rod and the five identification benchmarks; further systems load
from TOML definitions.

Flows are integrated with scipy's adaptive Dormand-Prince 5(4) pair at tight
tolerances so the sampled discrete flow is exact for identification purposes.
Snapshot sampling draws every trajectory's initial state from its own
counter-based Philox stream keyed by (seed, trajectory index), and integrates
trajectories in fixed-size chunks. At a fixed chunk size the results are
bit-identical however the chunks are scheduled across workers; a different
chunk size changes the adaptive step sequence and moves x_post by round-off.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy.integrate import solve_ivp

from config.loader import fail, key_line, load_toml, require
from config.settings import Config
from .errors import BadParams, ConfigError, Divergence, NonFinite, PoleHit, UnknownSystem

logger = logging.getLogger(__name__)

POLE_TOL = 1e-12
DEFAULT_CHUNK = 250

# (coefficient, exponent vector)
PolyTerm = Tuple[float, Tuple[int, ...]]
# (coefficient, numerator index l, denominator index k, power p), 0-based indices
RationalTerm = Tuple[float, int, int, int]


@dataclass(frozen=True)
class KnownGenerator:
    """Exact generator matrix on a stated dictionary (basis labels in column order)"""

    basis: Tuple[str, ...]
    matrix: np.ndarray


@dataclass(frozen=True)
class DynamicalSystem:
    name: str
    dim: int
    poly_terms: Tuple[Tuple[PolyTerm, ...], ...]
    rational_terms: Tuple[Tuple[RationalTerm, ...], ...] = ()
    known_generator: Optional[KnownGenerator] = None
    known_principal_eigenvalues: Optional[Tuple[complex, ...]] = None
    eigenvalue_source: Optional[str] = None  # "jacobian" | "floquet"
    fixed_point: Optional[Tuple[float, ...]] = None
    params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.poly_terms) != self.dim:
            raise ConfigError(f"system '{self.name}': expected {self.dim} polynomial term lists, got {len(self.poly_terms)}")
        if not self.rational_terms:
            object.__setattr__(self, "rational_terms", tuple(() for _ in range(self.dim)))
        for component in self.poly_terms:
            for _, exps in component:
                if len(exps) != self.dim or any(e < 0 for e in exps):
                    raise ConfigError(f"system '{self.name}': bad exponent vector {exps}")
        for component in self.rational_terms:
            for _, l, k, p in component:
                if not (0 <= l < self.dim and 0 <= k < self.dim) or p < 1:
                    raise ConfigError(f"system '{self.name}': bad rational term (l={l + 1}, k={k + 1}, p={p})")

    @property
    def is_polynomial(self) -> bool:
        return not any(self.rational_terms)

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        """Vector field at a batch of states (B x n) -> (B x n)"""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.zeros_like(X)
        for i in range(self.dim):
            for coef, exps in self.poly_terms[i]:
                out[:, i] += coef * np.prod(X ** np.asarray(exps), axis=1)
            for coef, l, k, p in self.rational_terms[i]:
                den = 1.0 + X[:, k] ** p
                bad = np.abs(den) < POLE_TOL
                if np.any(bad):
                    raise PoleHit(f"denominator 1+x{k + 1}^{p} vanishes",
                                  {"point": int(np.argmax(bad))})
                out[:, i] += coef * X[:, l] / den
        return out


def eval_field(sys: DynamicalSystem, x) -> np.ndarray:
    x = _state(sys, x)
    return sys.evaluate(x[None, :])[0]


def jacobian(sys: DynamicalSystem, x) -> np.ndarray:
    """Analytic Jacobian of the vector field at x"""
    x = _state(sys, x)
    n = sys.dim
    J = np.zeros((n, n))
    for i in range(n):
        for coef, exps in sys.poly_terms[i]:
            for j in range(n):
                if exps[j] == 0:
                    continue
                reduced = list(exps)
                reduced[j] -= 1
                J[i, j] += coef * exps[j] * np.prod(x ** np.asarray(reduced))
        for coef, l, k, p in sys.rational_terms[i]:
            den = 1.0 + x[k] ** p
            if abs(den) < POLE_TOL:
                raise PoleHit(f"denominator 1+x{k + 1}^{p} vanishes at {x.tolist()}")
            J[i, l] += coef / den
            J[i, k] -= coef * x[l] * p * x[k] ** (p - 1) / den ** 2
    return J


def _state(sys: DynamicalSystem, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != sys.dim:
        raise ConfigError(f"state has {x.shape[0]} entries, system '{sys.name}' has dimension {sys.dim}")
    if not np.all(np.isfinite(x)):
        raise NonFinite(f"state {x.tolist()} is not finite")
    return x


# ---------------------------------------------------------------------------
# Builtin systems
# ---------------------------------------------------------------------------

def _linear_terms(A: np.ndarray) -> Tuple[Tuple[PolyTerm, ...], ...]:
    n = A.shape[0]
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            if A[i, j] != 0.0:
                exps = [0] * n
                exps[j] = 1
                row.append((float(A[i, j]), tuple(exps)))
        rows.append(tuple(row))
    return tuple(rows)


def _rotation_system(name: str, a: float, omega: float, params: Dict[str, float]) -> DynamicalSystem:
    A = np.array([[a, omega], [-omega, a]])
    return DynamicalSystem(
        name=name,
        dim=2,
        poly_terms=_linear_terms(A),
        # column l holds the coefficients of L x_l = f_l
        known_generator=KnownGenerator(("x1", "x2"), A.T.copy()),
        known_principal_eigenvalues=(complex(a, omega), complex(a, -omega)),
        eigenvalue_source="jacobian",
        fixed_point=(0.0, 0.0),
        params=params,
    )


def _rod(params: Dict[str, float]) -> DynamicalSystem:
    a = float(params.get("a", 0.1))
    omega = float(params.get("omega", 3.0))
    return _rotation_system("rod", a, omega, {"a": a, "omega": omega})


def _linear_spiral(params: Dict[str, float]) -> DynamicalSystem:
    return _rotation_system("linear-spiral", 0.1, 3.0, {})


def _fixed_point_cubic(params: Dict[str, float]) -> DynamicalSystem:
    # x1' = -3 x2 - x1 (x1^2 + x2^2),  x2' = 3 x1 - x2 (x1^2 + x2^2)
    return DynamicalSystem(
        name="fixed-point-cubic",
        dim=2,
        poly_terms=(
            ((-3.0, (0, 1)), (-1.0, (3, 0)), (-1.0, (1, 2))),
            ((3.0, (1, 0)), (-1.0, (2, 1)), (-1.0, (0, 3))),
        ),
        known_principal_eigenvalues=(3j, -3j),
        eigenvalue_source="jacobian",
        fixed_point=(0.0, 0.0),
    )


def _limit_cycle(params: Dict[str, float]) -> DynamicalSystem:
    # x1' = 3 x2 - x1 (r^2 - 1),  x2' = -3 x1 - x2 (r^2 - 1); cycle at r = 1
    return DynamicalSystem(
        name="limit-cycle",
        dim=2,
        poly_terms=(
            ((3.0, (0, 1)), (-1.0, (3, 0)), (-1.0, (1, 2)), (1.0, (1, 0))),
            ((-3.0, (1, 0)), (-1.0, (2, 1)), (-1.0, (0, 3)), (1.0, (0, 1))),
        ),
        # Floquet exponent of the cycle plus its rotation frequency
        known_principal_eigenvalues=(complex(-2.0, 0.0), 3j, -3j),
        eigenvalue_source="floquet",
    )


def _real_eig_triangular(params: Dict[str, float]) -> DynamicalSystem:
    # x1' = -x1,  x2' = x1^2 - x2
    L = np.array([
        [-1.0, 0.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 1.0, -2.0],
    ])
    return DynamicalSystem(
        name="real-eig-triangular",
        dim=2,
        poly_terms=(
            ((-1.0, (1, 0)),),
            ((1.0, (2, 0)), (-1.0, (0, 1))),
        ),
        known_generator=KnownGenerator(("x1", "x2", "x1^2"), L),
        known_principal_eigenvalues=(complex(-1.0, 0.0), complex(-2.0, 0.0)),
        eigenvalue_source="jacobian",
        fixed_point=(0.0, 0.0),
    )


def _nonpoly_rational(params: Dict[str, float]) -> DynamicalSystem:
    # x1' = -x1 + 4 x2 / (1 + x2^2),  x2' = -x2 - 4 x1 / (1 + x2^2)
    return DynamicalSystem(
        name="nonpoly-rational",
        dim=2,
        poly_terms=(
            ((-1.0, (1, 0)),),
            ((-1.0, (0, 1)),),
        ),
        rational_terms=(
            ((4.0, 1, 1, 2),),
            ((-4.0, 0, 1, 2),),
        ),
        known_principal_eigenvalues=(complex(-1.0, 4.0), complex(-1.0, -4.0)),
        eigenvalue_source="jacobian",
        fixed_point=(0.0, 0.0),
    )


_BUILTINS: Dict[str, Tuple[Callable[[Dict[str, float]], DynamicalSystem], Tuple[str, ...]]] = {
    "rod": (_rod, ("a", "omega")),
    "linear-spiral": (_linear_spiral, ()),
    "fixed-point-cubic": (_fixed_point_cubic, ()),
    "limit-cycle": (_limit_cycle, ()),
    "real-eig-triangular": (_real_eig_triangular, ()),
    "nonpoly-rational": (_nonpoly_rational, ()),
}

ALIASES = {
    "sys1": "linear-spiral",
    "sys2": "fixed-point-cubic",
    "sys3": "limit-cycle",
    "sys4": "real-eig-triangular",
    "sys5": "nonpoly-rational",
}


def canonical_name(name: str) -> str:
    key = name.strip().lower()
    key = ALIASES.get(key, key)
    if key not in _BUILTINS:
        raise UnknownSystem(f"Unknown system: {name}. Available: {list_systems()}")
    return key


def list_systems() -> List[str]:
    return sorted(_BUILTINS) + sorted(ALIASES)


def builtin_system(name: str, params: Optional[Mapping[str, float]] = None) -> DynamicalSystem:
    key = canonical_name(name)
    factory, allowed = _BUILTINS[key]
    params = dict(params or {})
    unknown = sorted(set(params) - set(allowed))
    if unknown:
        raise BadParams(f"system '{key}' does not take parameters {unknown} (allowed: {list(allowed)})")
    for pname, value in params.items():
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise BadParams(f"parameter '{pname}' must be a finite number, got {value!r}")
    return factory(params)


# ---------------------------------------------------------------------------
# TOML system definitions
# ---------------------------------------------------------------------------

def load_system(path) -> DynamicalSystem:
    mapping, text = load_toml(path)
    return system_from_mapping(mapping, text)


def system_from_mapping(mapping: Mapping[str, Any], text: Optional[str] = None) -> DynamicalSystem:
    """
    Build a system from a parsed definition.

    Schema (indices 1-based):
        [system]
        name = "..."; dim = 2
        principal_eigenvalues = ["-1+4j", "-1-4j"]   # optional
        fixed_point = [0.0, 0.0]                       # optional
        [[system.poly]]     component, coef, exponents
        [[system.rational]] component, coef, l, k, p
    A [system] table holding only `builtin` (and optional `params`) refers to a builtin.
    """
    section = mapping.get("system")
    if not isinstance(section, Mapping):
        raise ConfigError("missing [system] table")

    if "builtin" in section:
        return builtin_system(section["builtin"], section.get("params", {}))

    name = str(require(section, "name", "system"))
    dim = require(section, "dim", "system")
    if not isinstance(dim, int) or dim < 1:
        raise fail(f"dim must be a positive integer, got {dim!r}", text, "dim")

    poly: List[List[PolyTerm]] = [[] for _ in range(dim)]
    for entry in section.get("poly", []):
        comp = _component(entry, dim, text)
        exps = tuple(int(e) for e in require(entry, "exponents", "system.poly"))
        if len(exps) != dim:
            raise fail(f"exponents {list(exps)} must have {dim} entries", text, "exponents")
        poly[comp].append((float(require(entry, "coef", "system.poly")), exps))

    rational: List[List[RationalTerm]] = [[] for _ in range(dim)]
    for entry in section.get("rational", []):
        comp = _component(entry, dim, text)
        l, k, p = (int(require(entry, key, "system.rational")) for key in ("l", "k", "p"))
        if not (1 <= l <= dim and 1 <= k <= dim) or p < 1:
            raise fail(f"rational term needs 1 <= l,k <= {dim} and p >= 1", text, "p")
        rational[comp].append((float(require(entry, "coef", "system.rational")), l - 1, k - 1, p))

    eigenvalues = None
    if "principal_eigenvalues" in section:
        try:
            eigenvalues = tuple(complex(str(v).replace(" ", "").replace("i", "j")) for v in section["principal_eigenvalues"])
        except ValueError as e:
            raise fail(f"cannot parse principal_eigenvalues: {e}", text, "principal_eigenvalues")

    fixed_point = None
    if "fixed_point" in section:
        fixed_point = tuple(float(v) for v in section["fixed_point"])
        if len(fixed_point) != dim:
            raise fail(f"fixed_point must have {dim} entries", text, "fixed_point")

    return DynamicalSystem(
        name=name,
        dim=dim,
        poly_terms=tuple(tuple(c) for c in poly),
        rational_terms=tuple(tuple(c) for c in rational),
        known_principal_eigenvalues=eigenvalues,
        eigenvalue_source=section.get("eigenvalue_source", "jacobian" if eigenvalues else None),
        fixed_point=fixed_point,
    )


def _component(entry: Mapping[str, Any], dim: int, text: Optional[str]) -> int:
    comp = entry.get("component")
    if not isinstance(comp, int) or not 1 <= comp <= dim:
        raise ConfigError(f"component must be an integer in 1..{dim}, got {comp!r}",
                          line=key_line(text, "component"))
    return comp - 1


# ---------------------------------------------------------------------------
# Flow map
# ---------------------------------------------------------------------------

BatchField = Callable[[np.ndarray], np.ndarray]


def integrate_batch(field_fn: BatchField, X0: np.ndarray, t_eval: Sequence[float],
                    rtol: Optional[float] = None, atol: Optional[float] = None,
                    method: Optional[str] = None) -> np.ndarray:
    """
    Integrate a batch of initial states through an autonomous field.

    Args:
        field_fn: maps (B x n) states to (B x n) derivatives
        X0: (B x n) initial states
        t_eval: increasing output times starting at 0

    Returns:
        Array (len(t_eval), B, n). Each interval between output times is
        integrated afresh from the previous output, so outputs are exact flow
        steps rather than dense-output interpolants.

    Raises:
        Divergence: a state norm exceeds Config.DIVERGENCE_NORM; context
        carries the batch index and time
    """
    X0 = np.atleast_2d(np.asarray(X0, dtype=float))
    B, n = X0.shape
    t_eval = np.asarray(t_eval, dtype=float)
    rtol = Config.ODE_RTOL if rtol is None else rtol
    atol = Config.ODE_ATOL if atol is None else atol
    method = method or Config.ODE_METHOD
    limit = Config.DIVERGENCE_NORM

    def rhs(_t, y):
        return field_fn(y.reshape(B, n)).ravel()

    def guard(_t, y):
        return limit - np.max(np.abs(y))

    guard.terminal = True

    out = np.empty((t_eval.size, B, n))
    out[0] = X0
    y = X0.ravel().copy()
    for idx in range(1, t_eval.size):
        t0, t1 = t_eval[idx - 1], t_eval[idx]
        if t1 > t0:
            sol = solve_ivp(rhs, (t0, t1), y, method=method, rtol=rtol, atol=atol, events=guard)
            if sol.status != 0:
                worst = int(np.argmax(np.abs(sol.y[:, -1]).reshape(B, n).max(axis=1)))
                raise Divergence(f"state left the ball of radius {limit:g} near t={sol.t[-1]:.4g}"
                                 if sol.status == 1 else f"integration failed: {sol.message}",
                                 {"trajectory": worst, "time": float(sol.t[-1])})
            y = sol.y[:, -1]
        if not np.all(np.isfinite(y)):
            raise Divergence("non-finite state", {"time": float(t1)})
        out[idx] = y.reshape(B, n)
    return out


def flow(sys: DynamicalSystem, x0, t: float, rtol: Optional[float] = None,
         atol: Optional[float] = None, method: Optional[str] = None) -> np.ndarray:
    """S^t(x0)"""
    x0 = _state(sys, x0)
    if t < 0:
        raise ConfigError(f"flow time must be nonnegative, got {t}")
    return integrate_batch(sys.evaluate, x0[None, :], [0.0, t], rtol, atol, method)[-1, 0]


def simulate(field_fn: BatchField, x0, horizon: float, rate_hz: float,
             n_samples: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Dense time series x(t_s), t_s = s / rate_hz.

    Returns:
        Tuple of (times, states) with states of shape (n_samples, n)
    """
    if rate_hz <= 0:
        raise ConfigError(f"sampling rate must be positive, got {rate_hz}")
    if n_samples is None:
        n_samples = int(round(horizon * rate_hz)) + 1
    times = np.arange(n_samples) / rate_hz
    x0 = np.asarray(x0, dtype=float).ravel()
    return times, integrate_batch(field_fn, x0[None, :], times)[:, 0, :]


# ---------------------------------------------------------------------------
# Snapshot sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SnapshotSet:
    """Paired states (x_pre[i], x_post[i]) separated by T_s, trajectory-major order"""

    x_pre: np.ndarray
    x_post: np.ndarray
    T_s: float
    seed: int
    init_box: Tuple[Tuple[float, float], ...]
    n_traj: int
    n_snap: int

    def __len__(self) -> int:
        return self.x_pre.shape[0]

    @property
    def pairs(self) -> List[Tuple[np.ndarray, np.ndarray]]:
        return list(zip(self.x_pre, self.x_post))


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for one trajectory"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def initial_states(n_traj: int, init_box: Sequence[Sequence[float]], seed: int) -> np.ndarray:
    lo = np.array([b[0] for b in init_box], dtype=float)
    hi = np.array([b[1] for b in init_box], dtype=float)
    return np.stack([trajectory_rng(seed, i).uniform(lo, hi) for i in range(n_traj)])


def _sample_chunk(sys: DynamicalSystem, X0: np.ndarray, n_snap: int, T_s: float, offset: int) -> np.ndarray:
    try:
        return integrate_batch(sys.evaluate, X0, T_s * np.arange(n_snap + 1))
    except Divergence as e:
        trajectory = offset + int(e.context.get("trajectory", 0))
        raise Divergence(f"trajectory {trajectory}: {e}", {**e.context, "trajectory": trajectory})


def sample_snapshots(sys: DynamicalSystem, n_traj: int, n_snap: int, T_s: float,
                     init_box: Sequence[Sequence[float]], seed: int,
                     jobs: int = 1, chunk_size: int = DEFAULT_CHUNK) -> SnapshotSet:
    """
    Draw n_traj initial states uniformly from init_box and record n_snap
    consecutive pairs (x(t_k), x(t_k + T_s)) along each trajectory.
    """
    if T_s <= 0:
        raise ConfigError(f"sampling period must be positive, got {T_s}")
    box = tuple((float(lo), float(hi)) for lo, hi in init_box)
    if len(box) != sys.dim or any(not hi > lo for lo, hi in box):
        raise ConfigError(f"init_box must give {sys.dim} nondegenerate intervals, got {box}")
    if n_traj < 1 or n_snap < 1:
        raise ConfigError("n_traj and n_snap must be at least 1")

    X0 = initial_states(n_traj, box, seed)
    starts = list(range(0, n_traj, chunk_size))
    logger.debug(f"Sampling {sys.name}: {n_traj} trajectories x {n_snap} snapshots, T_s={T_s}, {len(starts)} chunks")

    chunks = Parallel(n_jobs=jobs)(
        delayed(_sample_chunk)(sys, X0[s:s + chunk_size], n_snap, T_s, s) for s in starts
    )
    traj = np.concatenate(chunks, axis=1)  # (n_snap + 1, n_traj, n)
    pre = np.transpose(traj[:-1], (1, 0, 2)).reshape(-1, sys.dim)
    post = np.transpose(traj[1:], (1, 0, 2)).reshape(-1, sys.dim)
    return SnapshotSet(pre, post, float(T_s), int(seed), box, n_traj, n_snap)
