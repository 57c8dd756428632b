#!/usr/bin/env python3
"""
System Tools

Catalogue of builtin vector fields and server diagnostics.

**Natural Language Triggers:**
- "which systems are available" - builtin benchmarks and aliases
- "server status" / "system info" - host resources and numerical settings
"""

import logging
import sys
from datetime import datetime
from typing import Any, Dict

import psutil
from fastmcp import FastMCP

from ..base import ToolBase
from config.settings import Config
from koopman.dynamics import ALIASES, builtin_system, canonical_name, list_systems as builtin_names

logger = logging.getLogger(__name__)


def describe_systems() -> Dict[str, Any]:
    reverse = {v: k for k, v in ALIASES.items()}
    systems = {}
    for name in builtin_names():
        key = canonical_name(name)
        if key in systems:
            continue
        sys_ = builtin_system(key)
        systems[key] = {
            "alias": reverse.get(key),
            "dim": sys_.dim,
            "polynomial": sys_.is_polynomial,
            "principal_eigenvalues": list(sys_.known_principal_eigenvalues or ()),
            "eigenvalue_source": sys_.eigenvalue_source,
            "fixed_point": list(sys_.fixed_point) if sys_.fixed_point else None,
            "params": sys_.params,
        }
    return systems


def register_system_tools(mcp: FastMCP):
    """Register system tools with the FastMCP server"""

    @mcp.tool
    def list_systems() -> Dict[str, Any]:
        """
        List the builtin benchmark systems.

        Returns:
            Dictionary keyed by canonical name with dimension, principal
            eigenvalues and the sys1..sys5 alias
        """
        logger.info("list_systems tool called")
        return ToolBase.create_success_response({"systems": describe_systems()})

    @mcp.tool
    def get_server_info() -> Dict[str, Any]:
        """
        Get server diagnostics: host resources and numerical settings.

        Returns:
            Dictionary containing platform, memory and the active Config values
        """
        try:
            memory = psutil.virtual_memory()
            return ToolBase.create_success_response({
                "server": {
                    "name": "koopman-sampling-tools",
                    "timestamp": datetime.now().isoformat(),
                },
                "system": {
                    "platform": sys.platform,
                    "python_version": sys.version,
                    "cpu_count": psutil.cpu_count(),
                    "physical_cores": psutil.cpu_count(logical=False),
                    "memory_total": memory.total,
                    "memory_available": memory.available,
                },
                "settings": Config.get_all(),
            })
        except Exception as e:
            logger.error(f"Error getting server info: {e}")
            return ToolBase.error_from_exception(e)
