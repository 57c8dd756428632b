#!/usr/bin/env python3
"""
Experiment commands

Each cmd_* function computes its result and returns a dataclass; the matching
save() writes the CSV outputs plus summary.json into a directory. Sweeps draw
one snapshot set per T_s, identify every dictionary on it, and run the periods
through a joblib pool; rows come back dictionary-major in grid order.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from config.loader import load_toml
from config.settings import Config
from koopman.dynamics import DynamicalSystem, SnapshotSet, builtin_system, sample_snapshots, simulate
from koopman.errors import ConfigError, NumericError
from koopman.identification import (
    FieldCoefficients,
    IdentificationResult,
    eigenvalue_lattice,
    field_coefficients,
    identify,
    predict,
    true_generator_matrix,
)
from koopman.linalg import mat_exp, principal_log, spectrum_of
from koopman.metrics import SweepRow, nrmse, spectral_error
from koopman.observables import Dictionary
from koopman.sampling import (
    SamplingVerdict,
    critical_period,
    enumerate_aliases,
    in_strip,
    max_critical_period,
    nyquist_comparison,
)
from tools.base import ToolBase

from . import reports
from .config import ExperimentConfig

logger = logging.getLogger(__name__)

SAMPLE_MATCH_TOL = 1e-9


def _jobs(jobs: Optional[int]) -> int:
    return Config.JOBS if jobs is None else jobs


# ---------------------------------------------------------------------------
# critical-period
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CriticalPeriodReport:
    system: str
    source: str
    verdict: SamplingVerdict
    lattice_verdict: Optional[SamplingVerdict] = None

    def to_dict(self) -> Dict[str, Any]:
        data = {"system": self.system, "source": self.source, **self.verdict.to_dict()}
        if self.lattice_verdict is not None:
            data["lattice"] = self.lattice_verdict.to_dict()
        return data

    def save(self, out_dir: Path) -> Path:
        return reports.write_summary(Path(out_dir) / "summary.json", self.to_dict())


def load_spectra(path) -> List[List[complex]]:
    """
    Spectrum file: `eigenvalues = ["0.1+3j", ...]` or several
    `[[spectrum]] eigenvalues = [...]` tables (candidate eigenspaces).
    """
    mapping, _ = load_toml(path)
    tables = mapping.get("spectrum")
    entries = tables if isinstance(tables, list) else [mapping]
    spectra = []
    for entry in entries:
        if "eigenvalues" not in entry:
            raise ConfigError(f"{path}: every spectrum needs an `eigenvalues` list")
        try:
            spectra.append(ToolBase.parse_complex_list(entry["eigenvalues"]))
        except ValueError as e:
            raise ConfigError(f"{path}: cannot parse eigenvalues: {e}")
    if not spectra or not all(spectra):
        raise ConfigError(f"{path}: empty spectrum")
    return spectra


def cmd_critical_period(system: Optional[DynamicalSystem] = None,
                        spectra: Optional[Sequence[Sequence[complex]]] = None,
                        T_s: Optional[float] = None,
                        dictionary: Optional[Dictionary] = None,
                        degree: Optional[int] = None) -> CriticalPeriodReport:
    """
    T_gamma from supplied spectra, a system's principal eigenvalues, or the
    true generator on a dictionary, in that order of preference.

    Args:
        degree: also report the bound implied by all eigenvalue sums up to
            this order (eigenfunction products)
    """
    if spectra:
        name = system.name if system is not None else "spectrum"
        verdict = max_critical_period(spectra, T_s)
        source = "spectrum"
    elif system is None:
        raise ConfigError("critical-period needs a system or a spectrum file")
    elif dictionary is not None:
        generator = true_generator_matrix(system, dictionary)
        verdict = critical_period(generator.spectrum, T_s)
        name, source = system.name, f"generator {dictionary.label}"
    elif system.known_principal_eigenvalues:
        verdict = critical_period(system.known_principal_eigenvalues, T_s)
        name, source = system.name, system.eigenvalue_source or "principal"
    else:
        raise ConfigError(f"system '{system.name}' has no principal eigenvalues; supply a dictionary")

    lattice = None
    if degree is not None:
        base = list(verdict.spectrum.eigenvalues)
        lattice = critical_period(eigenvalue_lattice(base, degree), T_s)
    logger.info(f"{name}: T_gamma = {verdict.T_gamma:.6g} s, minimum frequency {verdict.min_frequency:.6g} rad/s")
    return CriticalPeriodReport(name, source, verdict, lattice)


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def reference_period(system: DynamicalSystem, dictionaries: Sequence[Dictionary]) -> float:
    """T_gamma used to flag sweep rows; infinite when nothing is known"""
    if system.known_principal_eigenvalues:
        return critical_period(system.known_principal_eigenvalues).T_gamma
    for dictionary in dictionaries:
        try:
            return critical_period(true_generator_matrix(system, dictionary).spectrum).T_gamma
        except NumericError:
            continue
    return math.inf


def _sample_at(config: ExperimentConfig, T_s: float, jobs: int = 1) -> SnapshotSet:
    return sample_snapshots(config.system, config.n_traj, config.n_snap, T_s,
                            config.init_box, config.seed, jobs=jobs)


def _identify_at(config: ExperimentConfig, dictionary: Dictionary, T_s: float, jobs: int = 1,
                 snapshots: Optional[SnapshotSet] = None) -> IdentificationResult:
    if snapshots is None:
        snapshots = _sample_at(config, T_s, jobs)
    return identify(snapshots, dictionary, config.pinv_rtol)


def _by_dictionary(per_period: Sequence[Sequence[Any]]) -> List[Any]:
    """Rows computed period by period, reordered dictionary-major"""
    if not per_period:
        return []
    return [rows[i] for i in range(len(per_period[0])) for rows in per_period]


def _sweep_period(config: ExperimentConfig, dictionaries: Sequence[Dictionary],
                  truths: Sequence[FieldCoefficients], T_s: float, T_gamma: float) -> List[SweepRow]:
    """One sample at T_s shared by every dictionary"""
    beyond = T_s >= T_gamma
    try:
        snapshots = _sample_at(config, T_s)
    except NumericError as e:
        logger.warning(f"Sampling at T_s={T_s} failed: {e.error_type}: {e}")
        return [SweepRow.failed(T_s, d.label, e.error_type, beyond) for d in dictionaries]

    rows = []
    for dictionary, w_true in zip(dictionaries, truths):
        try:
            result = _identify_at(config, dictionary, T_s, snapshots=snapshots)
            score = nrmse(result.field, w_true)
        except NumericError as e:
            logger.warning(f"Sweep cell T_s={T_s} {dictionary.label} failed: {e.error_type}: {e}")
            rows.append(SweepRow.failed(T_s, dictionary.label, e.error_type, beyond))
            continue
        logger.info(f"T_s={T_s} {dictionary.label}: nrmse={score:.3e}")
        rows.append(SweepRow(T_s, score, score ** 0.25, result.generator.max_abs_imag,
                             result.koopman.residual, dictionary.label, beyond))
    return rows


@dataclass(frozen=True)
class SweepResult:
    config: ExperimentConfig
    rows: Tuple[SweepRow, ...]
    T_gamma: float

    def save(self, out_dir: Path) -> Path:
        out_dir = Path(out_dir)
        path = reports.write_sweep(out_dir / "sweep.csv", self.rows)
        incoherent = [r.T_s for r in self.rows if r.ok and r.nrmse < 1e-6 and r.beyond_critical]
        reports.write_summary(out_dir / "summary.json", {
            "command": "sweep",
            "config": self.config.to_dict(),
            "T_gamma": self.T_gamma,
            "status_counts": reports.status_counts(self.rows),
            "exact_beyond_critical": incoherent,
        })
        return path


def cmd_sweep(config: ExperimentConfig, jobs: Optional[int] = None) -> SweepResult:
    dictionaries = config.built_dictionaries()
    truths = [field_coefficients(config.system, d) for d in dictionaries]
    T_gamma = reference_period(config.system, dictionaries)
    logger.info(f"Sweeping {config.system.name}: {len(config.grid)} periods x {len(dictionaries)} dictionaries, "
                f"T_gamma = {T_gamma:.6g} s")

    per_period = Parallel(n_jobs=_jobs(jobs))(
        delayed(_sweep_period)(config, dictionaries, truths, T_s, T_gamma) for T_s in config.grid
    )
    return SweepResult(config, tuple(_by_dictionary(per_period)), T_gamma)


# ---------------------------------------------------------------------------
# alias-demo
# ---------------------------------------------------------------------------

def angular_velocity(A: np.ndarray) -> float:
    """omega of a 2x2 field [[a, omega], [-omega, a]]"""
    return float((A[0, 1] - A[1, 0]) / 2.0)


def _linear_orbit(A: np.ndarray, x0: np.ndarray, times: np.ndarray) -> np.ndarray:
    return np.stack([mat_exp(A, t) @ x0 for t in times])


@dataclass(frozen=True)
class AliasDemo:
    a: float
    omega: float
    T_s: float
    L_true: np.ndarray
    L_alias: np.ndarray
    no_aliasing: bool
    sample_times: np.ndarray
    true_samples: np.ndarray
    alias_samples: np.ndarray
    times: np.ndarray
    true_dense: np.ndarray
    alias_dense: np.ndarray
    alias_count: int
    nyquist: Dict[str, Any] = field(default_factory=dict)

    @property
    def alias_angular_velocity(self) -> float:
        return angular_velocity(self.L_alias)

    @property
    def sample_gap(self) -> float:
        return float(np.max(np.linalg.norm(self.true_samples - self.alias_samples, axis=1)))

    @property
    def dense_gap(self) -> float:
        return float(np.max(np.linalg.norm(self.true_dense - self.alias_dense, axis=1)))

    @property
    def samples_coincide(self) -> bool:
        return self.sample_gap < SAMPLE_MATCH_TOL

    def to_dict(self) -> Dict[str, Any]:
        return {
            "a": self.a,
            "omega": self.omega,
            "T_s": self.T_s,
            "omega_T_s": self.omega * self.T_s,
            "no_aliasing": self.no_aliasing,
            "true_spectrum": list(spectrum_of(self.L_true).eigenvalues),
            "alias_spectrum": list(spectrum_of(self.L_alias).eigenvalues),
            "alias_angular_velocity": self.alias_angular_velocity,
            "L_alias": self.L_alias,
            "sample_gap": self.sample_gap,
            "samples_coincide": self.samples_coincide,
            "dense_gap": self.dense_gap,
            "alias_count": self.alias_count,
            "nyquist": self.nyquist,
        }

    def save(self, out_dir: Path) -> Path:
        out_dir = Path(out_dir)
        reports.write_trajectories(out_dir / "samples.csv", self.sample_times,
                                   {"true": self.true_samples, "alias": self.alias_samples})
        path = reports.write_trajectories(out_dir / "dense.csv", self.times,
                                          {"true": self.true_dense, "alias": self.alias_dense})
        reports.write_summary(out_dir / "summary.json", {"command": "alias-demo", **self.to_dict()})
        return path


def cmd_alias_demo(a: float = 0.1, omega: float = 3.0, T_s: float = 4 * math.pi / 9, n_photos: int = 10,
                   rate_hz: float = 100.0, x0: Sequence[float] = (1.0, 0.0)) -> AliasDemo:
    """
    Rotating rod seen through a camera with period T_s: the true field against
    the generator recovered by the principal logarithm of exp(A T_s).
    """
    if T_s <= 0 or n_photos < 1 or rate_hz <= 0:
        raise ConfigError("alias demo needs T_s > 0, n_photos >= 1 and rate > 0")
    turns = omega * T_s / (2 * math.pi)
    if omega != 0 and abs(turns - round(turns)) < 1e-12:
        logger.warning(f"omega*T_s is a multiple of 2 pi; the alias reduces to the real part {a}")

    system = builtin_system("rod", {"a": a, "omega": omega})
    A = system.known_generator.matrix.T  # state-space form x' = A x
    L_alias = principal_log(mat_exp(A, T_s)) / T_s
    x0 = np.asarray(x0, dtype=float)

    sample_times = T_s * np.arange(n_photos)
    times = np.arange(int(math.floor(sample_times[-1] * rate_hz + 1e-9)) + 1) / rate_hz
    demo = AliasDemo(
        a=a, omega=omega, T_s=T_s, L_true=A, L_alias=L_alias,
        no_aliasing=in_strip(A, T_s),
        sample_times=sample_times,
        true_samples=_linear_orbit(A, x0, sample_times),
        alias_samples=_linear_orbit(L_alias, x0, sample_times),
        times=times,
        true_dense=_linear_orbit(A, x0, times),
        alias_dense=_linear_orbit(L_alias, x0, times),
        alias_count=len(enumerate_aliases(A, T_s)),
        nyquist=nyquist_comparison(omega, a),
    )
    if demo.no_aliasing:
        logger.info(f"T_s={T_s:.6g} is below the critical period: no aliasing")
    else:
        logger.info(f"Alias angular velocity {demo.alias_angular_velocity:.6g} rad/s (true {omega})")
    if not demo.samples_coincide:
        logger.warning(f"Sampled positions differ by {demo.sample_gap:.3e}")
    return demo


# ---------------------------------------------------------------------------
# predict / spectral / simulate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Prediction:
    T_s: float
    dictionary: str
    times: np.ndarray
    truth: np.ndarray
    predicted: Optional[np.ndarray]
    status: str = "ok"

    @property
    def max_error(self) -> float:
        if self.predicted is None:
            return math.inf
        return float(np.max(np.abs(self.predicted - self.truth)))


@dataclass(frozen=True)
class PredictionResult:
    config: ExperimentConfig
    predictions: Tuple[Prediction, ...]

    def save(self, out_dir: Path) -> Path:
        out_dir = Path(out_dir)
        for i, p in enumerate(self.predictions):
            series = {"true": p.truth}
            if p.predicted is not None:
                series["pred"] = p.predicted
            reports.write_trajectories(out_dir / f"predict_{i:02d}_Ts{p.T_s:g}.csv", p.times, series)
        reports.write_summary(out_dir / "summary.json", {
            "command": "predict",
            "config": self.config.to_dict(),
            "runs": [{"T_s": p.T_s, "dictionary": p.dictionary, "status": p.status, "max_error": p.max_error}
                     for p in self.predictions],
        })
        return out_dir


def cmd_predict(config: ExperimentConfig, periods: Optional[Sequence[float]] = None,
                jobs: Optional[int] = None) -> PredictionResult:
    """True against identified trajectories from config.x0 for each dictionary and period"""
    periods = tuple(periods or config.prediction_periods)
    if not periods:
        raise ConfigError("no prediction periods given")
    times, truth = simulate(config.system.evaluate, config.x0, config.horizon, config.rate_hz)
    dictionaries = config.built_dictionaries()
    per_period = []
    for T_s in periods:
        try:
            snapshots = _sample_at(config, T_s, jobs=_jobs(jobs))
        except NumericError as e:
            logger.warning(f"Sampling at T_s={T_s} failed: {e.error_type}: {e}")
            per_period.append([Prediction(T_s, d.label, times, truth, None, e.error_type) for d in dictionaries])
            continue
        runs = []
        for dictionary in dictionaries:
            try:
                result = _identify_at(config, dictionary, T_s, snapshots=snapshots)
                _, predicted = predict(result.field, config.x0, config.horizon, config.rate_hz)
                runs.append(Prediction(T_s, dictionary.label, times, truth, predicted))
            except NumericError as e:
                logger.warning(f"Prediction at T_s={T_s} {dictionary.label} failed: {e.error_type}: {e}")
                runs.append(Prediction(T_s, dictionary.label, times, truth, None, e.error_type))
        per_period.append(runs)
    return PredictionResult(config, tuple(_by_dictionary(per_period)))


@dataclass(frozen=True)
class SpectralRow:
    T_s: float
    dictionary: str
    errors: Tuple[float, ...]
    status: str = "ok"


@dataclass(frozen=True)
class SpectralResult:
    config: ExperimentConfig
    rows: Tuple[SpectralRow, ...]

    def save(self, out_dir: Path) -> Path:
        out_dir = Path(out_dir)
        n = self.config.system.dim
        header = ["T_s", "dictionary", *[f"error_x{k + 1}" for k in range(n)], "status"]
        path = reports.write_csv(out_dir / "spectral.csv", header,
                                 ([r.T_s, r.dictionary, *r.errors, r.status] for r in self.rows))
        reports.write_summary(out_dir / "summary.json", {
            "command": "spectral", "config": self.config.to_dict(), "status_counts": reports.status_counts(self.rows),
        })
        return path


def _spectral_period(config: ExperimentConfig, dictionaries: Sequence[Dictionary], T_s: float,
                     truth: np.ndarray) -> List[SpectralRow]:
    failed = (math.nan,) * config.system.dim
    try:
        snapshots = _sample_at(config, T_s)
    except NumericError as e:
        logger.warning(f"Sampling at T_s={T_s} failed: {e.error_type}: {e}")
        return [SpectralRow(T_s, d.label, failed, e.error_type) for d in dictionaries]

    rows = []
    for dictionary in dictionaries:
        try:
            result = _identify_at(config, dictionary, T_s, snapshots=snapshots)
        except NumericError as e:
            logger.warning(f"Spectral cell T_s={T_s} {dictionary.label} failed: {e.error_type}: {e}")
            rows.append(SpectralRow(T_s, dictionary.label, failed, e.error_type))
            continue
        errors = spectral_error(config.system, result.field, config.x0, config.spectral_rate_hz,
                                config.spectral_samples, truth=truth)
        status = "ok" if np.all(np.isfinite(errors)) else "Divergence"
        rows.append(SpectralRow(T_s, dictionary.label, tuple(float(e) for e in errors), status))
    return rows


def cmd_spectral(config: ExperimentConfig, grid: Optional[Sequence[float]] = None,
                 jobs: Optional[int] = None) -> SpectralResult:
    grid = tuple(grid or config.grid)
    _, truth = simulate(config.system.evaluate, config.x0, 0.0, config.spectral_rate_hz, config.spectral_samples)
    dictionaries = config.built_dictionaries()
    per_period = Parallel(n_jobs=_jobs(jobs))(
        delayed(_spectral_period)(config, dictionaries, T_s, truth) for T_s in grid
    )
    return SpectralResult(config, tuple(_by_dictionary(per_period)))


@dataclass(frozen=True)
class Trajectory:
    system: str
    times: np.ndarray
    states: np.ndarray

    def save(self, out_dir: Path) -> Path:
        return reports.write_trajectories(Path(out_dir) / "trajectory.csv", self.times, {"": self.states})


def cmd_simulate(system: DynamicalSystem, x0: Sequence[float], horizon: float = 5.0,
                 rate_hz: float = 100.0) -> Trajectory:
    if len(x0) != system.dim:
        raise ConfigError(f"x0 has {len(x0)} entries, system '{system.name}' has dimension {system.dim}")
    times, states = simulate(system.evaluate, x0, horizon, rate_hz)
    return Trajectory(system.name, times, states)
