"""
Koopman-based identification of sampled continuous-time systems.

Modules: dynamics (vector fields, flow, snapshots), observables (dictionaries),
identification (regression, principal log, field recovery), sampling (critical
period, aliases), metrics (NRMSE, spectral error), linalg, errors.
"""
