#!/usr/bin/env python3
"""
Koopman Tools Registry

Dynamic tool loader that registers all available tools with the FastMCP server.
"""

import logging
from typing import Any, Dict, List

from fastmcp import FastMCP
from .analysis import register_all_analysis_tools, get_analysis_tool_descriptions

logger = logging.getLogger(__name__)


def register_all_tools(mcp: FastMCP) -> Dict[str, Any]:
    """
    Register all available tools with the FastMCP server.

    Args:
        mcp: FastMCP server instance

    Returns:
        Dictionary with registration results and tool information
    """
    logger.info("Starting modular tool registration process...")

    results = register_all_analysis_tools(mcp)
    total_successful = results["successful_registrations"]
    total_failed = results["failed_registrations"]

    logger.info(f"Modular tool registration complete: {total_successful}/{total_successful + total_failed} modules successful")

    if results["registration_errors"]:
        logger.warning(f"Registration errors occurred in {total_failed} modules")
        for error in results["registration_errors"]:
            logger.warning(f"  - {error['module']}: {error['status']} - {error['error']}")

    return {
        "architecture": "modular",
        "categories": {"analysis": results},
        "total_modules": total_successful + total_failed,
        "successful_registrations": total_successful,
        "failed_registrations": total_failed,
        "registered_tools": results["registered_tools"],
        "registration_errors": results["registration_errors"],
        "available_tools": get_tool_list(),
        "status": "completed" if total_failed == 0 else "completed_with_errors"
    }


def get_tool_list() -> List[str]:
    return list(get_all_tool_descriptions())


def get_all_tool_descriptions() -> Dict[str, str]:
    return dict(get_analysis_tool_descriptions())
