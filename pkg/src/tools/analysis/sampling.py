#!/usr/bin/env python3
"""
Sampling Tools

Critical sampling period and generator aliasing.

**Natural Language Triggers:**
- "critical sampling period of sys2" / "is T_s = 1.1 safe for sys1"
- "show the rod aliasing demo"
- "list the aliases of this generator at T_s"
"""

import logging
import math
from typing import Any, Dict, List, Optional

from fastmcp import FastMCP

from ..base import ToolBase
from harness.experiments import cmd_alias_demo, cmd_critical_period
from koopman.dynamics import builtin_system
from koopman.sampling import enumerate_aliases as alias_set

logger = logging.getLogger(__name__)


def register_sampling_tools(mcp: FastMCP):
    """Register sampling tools with the FastMCP server"""

    @mcp.tool
    def critical_period(system: Optional[str] = None, eigenvalues: Optional[List[str]] = None,
                        T_s: Optional[float] = None) -> Dict[str, Any]:
        """
        Critical sampling period T_gamma = pi / max|Im lambda|.

        Args:
            system: builtin system name (e.g. "sys2", "rod")
            eigenvalues: explicit spectrum such as ["0.1+3j", "0.1-3j"]
            T_s: optional sampling period to judge

        Returns:
            T_gamma, minimum sampling frequency and the no-aliasing verdict
        """
        logger.info(f"critical_period tool called: system={system}, T_s={T_s}")
        try:
            if eigenvalues:
                report = cmd_critical_period(spectra=[ToolBase.parse_complex_list(eigenvalues)], T_s=T_s)
            elif system:
                report = cmd_critical_period(builtin_system(system), T_s=T_s)
            else:
                return ToolBase.create_error_response("Provide a system name or eigenvalues", "ConfigError")
            return ToolBase.create_success_response(report.to_dict())
        except Exception as e:
            return ToolBase.error_from_exception(e)

    @mcp.tool
    def alias_demo(a: float = 0.1, omega: float = 3.0, T_s: float = 4 * math.pi / 9,
                   n_photos: int = 10) -> Dict[str, Any]:
        """
        Rotating rod x' = [[a, omega], [-omega, a]] x observed every T_s seconds.

        Returns:
            Alias spectrum and angular velocity, sample and dense-trajectory gaps
        """
        logger.info(f"alias_demo tool called: a={a}, omega={omega}, T_s={T_s}")
        try:
            return ToolBase.create_success_response(cmd_alias_demo(a, omega, T_s, n_photos).to_dict())
        except Exception as e:
            return ToolBase.error_from_exception(e)

    @mcp.tool
    def enumerate_aliases(matrix: List[List[float]], T_s: float, max_count: int = 16) -> Dict[str, Any]:
        """
        Real generators sharing exp(L T_s) whose eigenvalues stay within
        max|Im sigma(L)|.

        Args:
            matrix: square real generator, row-major
            T_s: sampling period
            max_count: cap on returned aliases

        Returns:
            One certificate per alias (branch shifts, exp gap, alias matrix)
        """
        logger.info(f"enumerate_aliases tool called: T_s={T_s}")
        try:
            aliases = alias_set(matrix, T_s, max_count)
            return ToolBase.create_success_response({
                "count": len(aliases),
                "unique": len(aliases) == 1,
                "aliases": [c.to_dict() for c in aliases],
            })
        except Exception as e:
            return ToolBase.error_from_exception(e)
