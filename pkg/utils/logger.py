#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Logging utilities"""

import logging
import os
from datetime import datetime
from pathlib import Path

from rich.logging import RichHandler

from config.settings import LOG_DIR


class LoggerManager:
    """Centralized logger management"""

    _instance = None
    _logger = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self):
        if self._logger is None:
            self._setup_logger()

    def _setup_logger(self):
        """Setup logging configuration"""
        self._logger = logging.getLogger('EnergyVideoEvents')
        self._logger.setLevel(logging.DEBUG)
        self._logger.propagate = False

        # Console handler
        console_handler = RichHandler(
            level=logging.INFO,
            show_path=False,
            markup=False,
            log_time_format='%Y-%m-%d %H:%M:%S'
        )
        self._logger.addHandler(console_handler)

        if os.environ.get('EBV_NO_FILE_LOG') == '1':
            return

        log_dir = Path(os.environ.get('EBV_LOG_DIR', LOG_DIR))
        log_dir.mkdir(parents=True, exist_ok=True)
        log_file = log_dir / f"events_{datetime.now().strftime('%Y%m%d_%H%M%S')}.log"

        # File handler
        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        ))
        self._logger.addHandler(file_handler)

        self._logger.debug("=" * 60)
        self._logger.debug("Energy video events session started")
        self._logger.debug(f"Log file: {log_file}")
        self._logger.debug("=" * 60)

    def get_logger(self):
        """Get logger instance"""
        return self._logger


# Singleton instance
def get_logger():
    """Get global logger"""
    return LoggerManager().get_logger()
