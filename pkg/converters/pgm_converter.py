#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Grayscale frame files (binary PGM, maxval 255)"""

from pathlib import Path

from converters.base_converter import BaseConverter
from core.fusion import FrameTensor
from core.pipeline import load_frame, save_frame


class PgmConverter(BaseConverter):
    """Read and write P5 frames through Pillow"""

    name = 'pgm'

    def read(self, path) -> FrameTensor:
        return load_frame(self.validate_input(path))

    def write(self, frame: FrameTensor, path) -> Path:
        path = save_frame(frame, self.ensure_output_dir(path))
        self.logger.debug(f"Wrote frame {frame.height}x{frame.width} -> {path}")
        return path
