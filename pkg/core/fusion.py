#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""First-layer input regimes: per-frame, aggregative sum and gradient differencing"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence

import numpy as np

from core.errors import ConfigurationError, DataError, PreconditionError

# Standard deviations at or below this are treated as zero variance
ZERO_STD = 1e-12


class FusionMode(str, Enum):
    """How the frames of one clip become first-layer rows"""

    STANDARD = 'standard'
    AGGREGATIVE = 'aggregative'
    GRADIENT = 'gradient'

    @property
    def tag(self) -> int:
        return _FUSION_TAGS[self]

    @classmethod
    def from_tag(cls, tag: int) -> "FusionMode":
        for mode, value in _FUSION_TAGS.items():
            if value == tag:
                return mode
        raise DataError("Unknown fusion tag", context={'tag': tag})

    @classmethod
    def parse(cls, name: str) -> "FusionMode":
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise ConfigurationError(
                f"Unknown fusion mode '{name}'",
                {'choices': ', '.join(m.value for m in cls)}
            ) from None


_FUSION_TAGS = {
    FusionMode.STANDARD: 0,
    FusionMode.AGGREGATIVE: 1,
    FusionMode.GRADIENT: 2,
}


@dataclass
class FrameTensor:
    """One grayscale frame stored as a flat row-major vector"""

    height: int
    width: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if self.values.size != self.height * self.width:
            raise DataError(
                "Frame length does not match its dimensions",
                context={'height': self.height, 'width': self.width, 'length': self.values.size}
            )
        if not np.all(np.isfinite(self.values)):
            raise DataError("Frame contains non-finite values")

    @classmethod
    def from_image(cls, image: np.ndarray) -> "FrameTensor":
        image = np.asarray(image, dtype=np.float64)
        return cls(image.shape[0], image.shape[1], image.reshape(-1))

    def as_image(self) -> np.ndarray:
        return self.values.reshape(self.height, self.width)

    @property
    def shape(self):
        return (self.height, self.width)


def _check_same_shape(frames: Sequence[FrameTensor]) -> None:
    first = frames[0].shape
    for index, frame in enumerate(frames[1:], start=1):
        if frame.shape != first:
            raise DataError(
                "Frames of one clip must share dimensions",
                context={'expected': first, 'found': frame.shape, 'frame': index}
            )


def fuse_aggregative(frames: Sequence[FrameTensor]) -> FrameTensor:
    """Sum all frames of a clip into one"""
    if not frames:
        raise PreconditionError("Aggregative fusion needs at least one frame")
    _check_same_shape(frames)
    total = np.zeros_like(frames[0].values)
    for frame in frames:
        total += frame.values
    return FrameTensor(frames[0].height, frames[0].width, total)


def fuse_gradient(frames: Sequence[FrameTensor]) -> List[FrameTensor]:
    """Consecutive differences frames[k+1] - frames[k], in temporal order"""
    if len(frames) < 2:
        raise PreconditionError("Gradient fusion needs at least two frames", {'frames': len(frames)})
    _check_same_shape(frames)
    return [
        FrameTensor(nxt.height, nxt.width, nxt.values - prev.values)
        for prev, nxt in zip(frames[:-1], frames[1:])
    ]


def fuse_standard(frames: Sequence[FrameTensor]) -> List[FrameTensor]:
    if not frames:
        raise PreconditionError("Standard mode needs at least one frame")
    return list(frames)


def fuse(frames: Sequence[FrameTensor], mode: FusionMode) -> List[FrameTensor]:
    """Dispatch on the fusion mode; always returns a list of rows"""
    mode = FusionMode(mode)
    if mode is FusionMode.AGGREGATIVE:
        return [fuse_aggregative(frames)]
    if mode is FusionMode.GRADIENT:
        return fuse_gradient(frames)
    return fuse_standard(frames)


def rows_per_clip(mode: FusionMode, n_frames: int) -> int:
    mode = FusionMode(mode)
    if mode is FusionMode.AGGREGATIVE:
        return 1
    if mode is FusionMode.GRADIENT:
        return n_frames - 1
    return n_frames


def standardize_values(values: np.ndarray, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    """(value - mean) / std per position; zero-variance positions map to 0"""
    values = np.asarray(values, dtype=np.float64)
    mean = np.asarray(mean, dtype=np.float64)
    std = np.asarray(std, dtype=np.float64)
    flat = std <= ZERO_STD
    divisor = np.where(flat, 1.0, std)
    out = (values - mean) / divisor
    if np.any(flat):
        out = np.where(flat, 0.0, out)
    return out


def restandardize(frame: FrameTensor, mean: np.ndarray, std: np.ndarray) -> FrameTensor:
    mean = np.asarray(mean, dtype=np.float64).reshape(-1)
    std = np.asarray(std, dtype=np.float64).reshape(-1)
    if mean.size != frame.values.size or std.size != frame.values.size:
        raise ConfigurationError(
            "Statistics length does not match frame",
            {'frame': frame.values.size, 'mean': mean.size, 'std': std.size}
        )
    return FrameTensor(frame.height, frame.width, standardize_values(frame.values, mean, std))
