#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Converter factory

Every on-disk format has a converter keyed by name. Extra converters can
be registered at runtime and take precedence over the built-in ones.
"""

from typing import Dict, Optional, Type

from converters.base_converter import BaseConverter
from converters.cache_converter import FusedCacheConverter
from converters.checkpoint_converter import Checkpoint, CheckpointConverter
from converters.pgm_converter import PgmConverter
from converters.stats_converter import StatsConverter
from utils.logger import get_logger

logger = get_logger()


class ConverterFactory:
    """Factory for format converters"""

    _converters: Dict[str, Type[BaseConverter]] = {
        'pgm': PgmConverter,
        'stats': StatsConverter,
        'checkpoint': CheckpointConverter,
        'cache': FusedCacheConverter,
    }

    _custom_converters: Dict[str, Type[BaseConverter]] = {}

    @classmethod
    def get_converter(cls, name: str) -> Optional[BaseConverter]:
        """
        Get a converter instance by format name

        Returns:
            Converter instance or None if the format is unknown
        """
        converter_class = cls._custom_converters.get(name) or cls._converters.get(name)
        if converter_class is None:
            logger.warning(f"No converter available for format: {name}")
            return None
        logger.debug(f"Created converter instance for format: {name}")
        return converter_class()

    @classmethod
    def register_converter(cls, name: str, converter_class: Type[BaseConverter]) -> bool:
        if not issubclass(converter_class, BaseConverter):
            logger.error(f"Cannot register {converter_class.__name__}: must inherit from BaseConverter")
            return False
        cls._custom_converters[name] = converter_class
        logger.info(f"Registered custom converter for format: {name}")
        return True


def get_converter(name: str) -> Optional[BaseConverter]:
    return ConverterFactory.get_converter(name)


__all__ = [
    'BaseConverter',
    'Checkpoint',
    'CheckpointConverter',
    'ConverterFactory',
    'FusedCacheConverter',
    'PgmConverter',
    'StatsConverter',
    'get_converter',
]
