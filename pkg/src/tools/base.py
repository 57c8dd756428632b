#!/usr/bin/env python3
"""
Base utilities for MCP tools
"""

import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from koopman.errors import KoopmanError

logger = logging.getLogger(__name__)


class ToolBase:
    """Base class for MCP tools with common utilities"""

    @staticmethod
    def parse_complex_list(values: Sequence[Any]) -> List[complex]:
        """Accept numbers or strings like '0.1+3j' / '0.1+3i'"""
        parsed = []
        for v in values:
            if isinstance(v, (int, float, complex)):
                parsed.append(complex(v))
            else:
                parsed.append(complex(str(v).replace(" ", "").replace("i", "j")))
        return parsed

    @staticmethod
    def to_jsonable(value: Any) -> Any:
        """numpy arrays, complex numbers and non-finite floats into JSON-safe values"""
        if isinstance(value, dict):
            return {str(k): ToolBase.to_jsonable(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [ToolBase.to_jsonable(v) for v in value]
        if isinstance(value, np.ndarray):
            return ToolBase.to_jsonable(value.tolist())
        if isinstance(value, (complex, np.complexfloating)):
            return str(complex(value))
        if isinstance(value, (float, np.floating)):
            value = float(value)
            return value if np.isfinite(value) else repr(value)
        if isinstance(value, (np.integer, np.bool_)):
            return value.item()
        if isinstance(value, Path):
            return str(value)
        return value

    @staticmethod
    def create_error_response(error_msg: str, error_type: str = "error",
                              context: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        """Create standardized error response"""
        response = {
            "error": error_msg,
            "status": "error",
            "timestamp": datetime.now().isoformat(),
            "type": error_type
        }

        if context:
            response["context"] = ToolBase.to_jsonable(context)

        return response

    @staticmethod
    def error_from_exception(e: Exception) -> Dict[str, Any]:
        if isinstance(e, KoopmanError):
            return ToolBase.create_error_response(str(e), e.error_type, e.context)
        logger.error(f"Unexpected tool failure: {e}")
        return ToolBase.create_error_response(str(e), type(e).__name__)

    @staticmethod
    def create_success_response(data: Dict[str, Any]) -> Dict[str, Any]:
        """Create standardized success response"""
        base_response = {
            "status": "success",
            "timestamp": datetime.now().isoformat()
        }

        return {**base_response, **ToolBase.to_jsonable(data)}
