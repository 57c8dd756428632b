#!/usr/bin/env python3
"""
Koopman Sampling Tools Server

FastMCP server exposing the critical-period, aliasing and identification tools
over HTTP streaming, with a /health route for container checks.
"""

import logging
import sys
from datetime import datetime
from typing import Any, Dict, Optional, Tuple

import uvicorn
from fastmcp import FastMCP
from starlette.requests import Request
from starlette.responses import JSONResponse
from starlette.routing import Route

from __version__ import __version__
from config.settings import Config
from tools import get_all_tool_descriptions, register_all_tools

logger = logging.getLogger(__name__)


def build_server() -> Tuple[FastMCP, Dict[str, Any]]:
    mcp = FastMCP("Koopman Sampling Tools")
    return mcp, register_all_tools(mcp)


def create_app(port: Optional[int] = None):
    """HTTP app with the MCP endpoint and /health"""
    mcp, registration_result = build_server()
    app = mcp.http_app()

    async def health_check(request: Request):
        tool_descriptions = get_all_tool_descriptions()
        return JSONResponse({
            "status": "healthy",
            "service": "koopman-sampling-tools",
            "version": __version__,
            "transport": "FastMCP HTTP Streaming",
            "timestamp": datetime.now().isoformat(),
            "port": port or Config.DEFAULT_PORT,
            "tools": {
                "available": list(tool_descriptions.keys()),
                "count": len(tool_descriptions),
            },
            "registration": {
                "status": registration_result["status"],
                "successful": registration_result["successful_registrations"],
                "failed": registration_result["failed_registrations"],
                "total": registration_result["total_modules"]
            }
        })

    app.routes.append(Route('/health', health_check, methods=['GET']))
    return app


def main(port: Optional[int] = None):
    """Start the Koopman tools server"""
    port = port or Config.DEFAULT_PORT
    if not logging.getLogger().handlers:
        logging.basicConfig(
            level=getattr(logging, Config.LOG_LEVEL),
            format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
        )
    logger.info(f"Starting Koopman Sampling Tools server on port {port}")

    try:
        app = create_app(port)
        logger.info(f"Available tools: {', '.join(get_all_tool_descriptions().keys())}")
        uvicorn.run(
            app,
            host="0.0.0.0",
            port=port,
            log_level=Config.LOG_LEVEL.lower()
        )
    except Exception as e:
        logger.error(f"Failed to start Koopman tools server: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
