#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Standardization sidecar

Layout (little-endian): b"EBST" | u32 version | u64 feature count |
mean[count] f64 | std[count] f64
"""

import struct
from pathlib import Path

import numpy as np

from converters.base_converter import BaseConverter
from core.errors import DataError
from core.pipeline import FrameStats

MAGIC = b'EBST'
VERSION = 1
HEADER = struct.Struct('<4sIQ')


class StatsConverter(BaseConverter):
    """Per-pixel mean/std vectors"""

    name = 'stats'

    def read(self, path) -> FrameStats:
        path = self.validate_input(path)
        data = path.read_bytes()
        if len(data) < HEADER.size:
            raise DataError("Truncated stats header", context={'path': str(path)})
        magic, version, count = HEADER.unpack_from(data, 0)
        if magic != MAGIC:
            raise DataError("Not a stats sidecar (bad magic)", context={'path': str(path)})
        if version != VERSION:
            raise DataError("Unsupported stats version", context={'path': str(path), 'version': version})
        expected = HEADER.size + 2 * 8 * count
        if len(data) != expected:
            raise DataError("Stats payload length does not match header",
                            context={'path': str(path), 'expected': expected, 'found': len(data)})
        values = np.frombuffer(data, dtype='<f8', offset=HEADER.size).astype(np.float64)
        return FrameStats(values[:count].copy(), values[count:].copy())

    def write(self, stats: FrameStats, path) -> Path:
        path = self.ensure_output_dir(path)
        mean = np.ascontiguousarray(stats.mean, dtype='<f8').reshape(-1)
        std = np.ascontiguousarray(stats.std, dtype='<f8').reshape(-1)
        if mean.size != std.size:
            raise DataError("Mean and std lengths differ", context={'mean': mean.size, 'std': std.size})
        with open(path, 'wb') as handle:
            handle.write(HEADER.pack(MAGIC, VERSION, mean.size))
            handle.write(mean.tobytes())
            handle.write(std.tobytes())
        self.logger.debug(f"Wrote stats ({mean.size} features) -> {path}")
        return path
