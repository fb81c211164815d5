#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Base converter class"""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any

from core.errors import DataError
from utils.logger import get_logger

logger = get_logger()


class BaseConverter(ABC):
    """Abstract base class for every on-disk format"""

    name = 'base'

    def __init__(self):
        self.logger = get_logger()

    @abstractmethod
    def read(self, path: Path) -> Any:
        """
        Decode a file into its in-memory object

        Args:
            path: Path to input file

        Returns:
            The decoded object

        Raises:
            DataError: the file is missing or malformed
        """

    @abstractmethod
    def write(self, obj: Any, path: Path) -> Path:
        """
        Encode an object to disk

        Args:
            obj: Object to encode
            path: Destination path

        Returns:
            The written path
        """

    def validate_input(self, path) -> Path:
        """Validate input file exists"""
        path = Path(path)
        if not path.exists():
            self.logger.error(f"Input file not found: {path}")
            raise DataError(f"{self.name} input not found", context={'path': str(path)})
        return path

    def ensure_output_dir(self, path) -> Path:
        """Ensure output directory exists"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        return path
