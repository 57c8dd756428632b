#!/usr/bin/env python3
"""
Identification Tools

**Natural Language Triggers:**
- "identify sys1 at T_s = 0.5"
- "what does EDMD recover for sys5 with P = 2"
"""

import logging
from typing import Any, Dict, List, Optional

from fastmcp import FastMCP

from ..base import ToolBase
from koopman.dynamics import builtin_system, sample_snapshots
from koopman.identification import field_coefficients, identify as run_identification
from koopman.metrics import nrmse
from koopman.observables import build_dictionary, custom_dictionary
from koopman.sampling import critical_period

logger = logging.getLogger(__name__)


def register_identification_tools(mcp: FastMCP):
    """Register identification tools with the FastMCP server"""

    @mcp.tool
    def identify(system: str, T_s: float, seed: int, m: int = 1, P: Optional[int] = None,
                 basis: Optional[List[str]] = None, n_traj: int = 200, n_snap: int = 10,
                 box: float = 1.0) -> Dict[str, Any]:
        """
        Sample a builtin system at period T_s and identify its vector field.

        Args:
            system: builtin system name
            T_s: sampling period in seconds
            seed: random seed for the initial states
            m: dictionary degree (ignored when basis is given)
            P: rational power cap
            basis: custom dictionary labels, e.g. ["x1", "x2", "x1^2"]
            n_traj: number of trajectories
            n_snap: snapshot pairs per trajectory
            box: initial states drawn from [-box, box]^n

        Returns:
            Identified generator, its spectrum, the field coefficients and NRMSE
        """
        logger.info(f"identify tool called: system={system}, T_s={T_s}, m={m}, P={P}")
        try:
            sys_ = builtin_system(system)
            dictionary = custom_dictionary(basis, sys_.dim) if basis else build_dictionary(sys_.dim, m, rational_cap=P)
            snapshots = sample_snapshots(sys_, n_traj, n_snap, T_s, [(-box, box)] * sys_.dim, seed)
            result = run_identification(snapshots, dictionary)
            data = {
                "system": sys_.name,
                "T_s": T_s,
                "dictionary": dictionary.labels,
                "L_hat": result.generator.L_hat,
                "spectrum": list(result.generator.spectrum.eigenvalues),
                "max_abs_imag": result.generator.max_abs_imag,
                "residual": result.koopman.residual,
                "w_hat": result.field.w,
            }
            if sys_.known_principal_eigenvalues:
                data["no_aliasing"] = critical_period(sys_.known_principal_eigenvalues, T_s).no_aliasing_at[1]
            try:
                data["nrmse"] = nrmse(result.field, field_coefficients(sys_, dictionary))
            except Exception as e:
                logger.info(f"NRMSE unavailable for {dictionary.label}: {e}")
            return ToolBase.create_success_response(data)
        except Exception as e:
            return ToolBase.error_from_exception(e)
