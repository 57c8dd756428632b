#!/usr/bin/env python3
"""
Configuration settings for the Koopman sampling toolkit
"""

import os
from pathlib import Path
from typing import Dict, Any

import psutil


def _default_jobs() -> int:
    return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1


class Config:
    """Configuration class for centralized settings"""

    # Server configuration
    DEFAULT_PORT = int(os.getenv("MCP_SERVER_PORT", "8002"))
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

    # Worker pool
    JOBS = int(os.getenv("KOOPMAN_JOBS", str(_default_jobs())))

    # Integrator: Dormand-Prince 5(4)
    ODE_METHOD = os.getenv("ODE_METHOD", "RK45")
    ODE_RTOL = float(os.getenv("ODE_RTOL", "1e-12"))
    ODE_ATOL = float(os.getenv("ODE_ATOL", "1e-12"))
    DIVERGENCE_NORM = float(os.getenv("DIVERGENCE_NORM", "1e6"))

    # Linear algebra
    PINV_RTOL_FACTOR = float(os.getenv("PINV_RTOL_FACTOR", "1e-10"))  # times max(K, N)
    BRANCH_CUT_TOL = float(os.getenv("BRANCH_CUT_TOL", "1e-10"))
    EIG_COND_WARN = float(os.getenv("EIG_COND_WARN", "1e8"))

    # Outputs
    DEFAULT_OUT_DIR = Path(os.getenv("KOOPMAN_OUT_DIR", "runs"))

    @classmethod
    def get_all(cls) -> Dict[str, Any]:
        """Get all configuration values as dictionary"""
        return {
            "port": cls.DEFAULT_PORT,
            "log_level": cls.LOG_LEVEL,
            "jobs": cls.JOBS,
            "ode_method": cls.ODE_METHOD,
            "ode_rtol": cls.ODE_RTOL,
            "ode_atol": cls.ODE_ATOL,
            "divergence_norm": cls.DIVERGENCE_NORM,
            "pinv_rtol_factor": cls.PINV_RTOL_FACTOR,
            "branch_cut_tol": cls.BRANCH_CUT_TOL,
            "eig_cond_warn": cls.EIG_COND_WARN,
            "out_dir": str(cls.DEFAULT_OUT_DIR),
        }
