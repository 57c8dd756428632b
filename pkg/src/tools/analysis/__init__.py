#!/usr/bin/env python3
"""
Koopman Tools - Analysis Module

Critical sampling period, aliasing and identification tools.
"""

import logging
from typing import Any, Dict

from fastmcp import FastMCP

logger = logging.getLogger(__name__)


def register_all_analysis_tools(mcp: FastMCP) -> Dict[str, Any]:
    """
    Register all analysis tools with the FastMCP server.

    Args:
        mcp: FastMCP server instance

    Returns:
        Dictionary with registration results
    """
    registered_tools = []
    registration_errors = []

    analysis_modules = [
        ("systems", "register_system_tools"),
        ("sampling", "register_sampling_tools"),
        ("identification", "register_identification_tools"),
    ]

    logger.info("Starting analysis tools registration...")

    for module_name, register_function_name in analysis_modules:
        try:
            module = __import__(f"tools.analysis.{module_name}", fromlist=[register_function_name])
            register_function = getattr(module, register_function_name)
            register_function(mcp)

            registered_tools.append({
                "module": f"analysis.{module_name}",
                "register_function": register_function_name,
                "status": "success"
            })
            logger.info(f"Successfully registered analysis tools from: analysis.{module_name}")

        except Exception as e:
            registration_errors.append({
                "module": f"analysis.{module_name}",
                "register_function": register_function_name,
                "status": "error",
                "error": str(e)
            })
            logger.error(f"Error registering analysis tools from {module_name}: {e}")

    return {
        "category": "analysis",
        "successful_registrations": len(registered_tools),
        "failed_registrations": len(registration_errors),
        "registered_tools": registered_tools,
        "registration_errors": registration_errors
    }


def get_analysis_tool_descriptions() -> Dict[str, str]:
    """
    Get descriptions of all available analysis tools.

    Returns:
        Dictionary mapping tool names to their descriptions
    """
    return {
        "list_systems": "List builtin benchmark systems with their principal eigenvalues",
        "get_server_info": "Server diagnostics: host resources and numerical settings",
        "critical_period": "Critical sampling period T_gamma = pi / max|Im lambda| of a system or spectrum",
        "alias_demo": "Rotating-rod aliasing demonstration: true against recovered generator",
        "enumerate_aliases": "All real generator aliases of a matrix that share exp(L T_s)",
        "identify": "Identify a builtin system from sampled snapshots and score the result",
    }
