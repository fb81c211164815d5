#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Exception hierarchy shared by every module"""

from typing import Any, Dict, Optional

from config.settings import EXIT_CONFIG, EXIT_DATA, EXIT_DIVERGENCE


class EnergyVideoError(Exception):
    """Base class for all expected failures"""

    exit_code = 1

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.context = dict(context or {})

    def __str__(self) -> str:
        if not self.context:
            return self.message
        details = ", ".join(f"{k}={v}" for k, v in self.context.items())
        return f"{self.message} ({details})"


class ConfigurationError(EnergyVideoError):
    """Invalid configuration, unknown preset or incompatible shapes"""

    exit_code = EXIT_CONFIG


class PreconditionError(EnergyVideoError):
    """An operation was called outside its domain"""

    exit_code = EXIT_CONFIG


class DataError(EnergyVideoError):
    """Malformed or missing input data"""

    exit_code = EXIT_DATA

    def __init__(self, message: str, clip_id: Optional[str] = None,
                 line: Optional[int] = None, context: Optional[Dict[str, Any]] = None):
        ctx = dict(context or {})
        if clip_id is not None:
            ctx['clip_id'] = clip_id
        if line is not None:
            ctx['line'] = line
        super().__init__(message, ctx)
        self.clip_id = clip_id
        self.line = line


class DivergenceError(EnergyVideoError):
    """Training produced non-finite values"""

    exit_code = EXIT_DIVERGENCE
