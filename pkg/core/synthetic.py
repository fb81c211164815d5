#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Synthetic moving-blob clips

Each clip shows a bright square sliding across a dim, noisy background
inside a black letterbox. The event class is the direction of motion, so
per-frame position, frame sums and frame differences all carry the label.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

import numpy as np

from config.settings import FRAME_HEIGHT, FRAME_WIDTH
from core.errors import ConfigurationError
from core.fusion import FrameTensor
from core.numerics import RngStream
from core.pipeline import ClipRecord, DatasetManifest, save_frame, write_manifest
from utils.logger import get_logger

logger = get_logger()

MANIFEST_NAME = 'manifest.tsv'


@dataclass(frozen=True)
class Motion:
    label: str
    start: Tuple[int, int]
    velocity: Tuple[int, int]


MOTIONS = (
    Motion('move_right', (28, 8), (0, 3)),
    Motion('move_down', (6, 40), (3, 0)),
    Motion('move_down_right', (6, 8), (3, 3)),
    Motion('move_up_right', (50, 8), (-3, 3)),
)


@dataclass(frozen=True)
class BlobStyle:
    blob_size: int = 16
    blob_level: float = 0.9
    background: float = 0.15
    noise: float = 0.02
    jitter: int = 3
    border: int = 4


def render_clip(motion: Motion, n_frames: int, rng: RngStream, style: BlobStyle = BlobStyle(),
                height: int = FRAME_HEIGHT, width: int = FRAME_WIDTH) -> List[FrameTensor]:
    """Frames of one clip, values in [0, 1]"""
    inner_h = height - 2 * style.border
    inner_w = width - 2 * style.border
    offset = rng.integers(-style.jitter, style.jitter + 1, size=2)
    frames = []
    for t in range(n_frames):
        canvas = np.zeros((height, width))
        inner = style.background + rng.normal((inner_h, inner_w), scale=style.noise)
        row = int(np.clip(motion.start[0] + offset[0] + motion.velocity[0] * t, 0, inner_h - style.blob_size))
        col = int(np.clip(motion.start[1] + offset[1] + motion.velocity[1] * t, 0, inner_w - style.blob_size))
        inner[row:row + style.blob_size, col:col + style.blob_size] = style.blob_level
        canvas[style.border:height - style.border, style.border:width - style.border] = inner
        frames.append(FrameTensor.from_image(np.clip(canvas, 0.0, 1.0)))
    return frames


def make_moving_blob_dataset(out_dir, n_train: int = 60, n_test: int = 30, n_classes: int = 3,
                             seed: int = 0, frames_per_clip: int = 12,
                             height: int = FRAME_HEIGHT, width: int = FRAME_WIDTH,
                             style: BlobStyle = BlobStyle()) -> Path:
    """
    Write PGM frames and a manifest for a balanced moving-blob dataset

    Clips are assigned classes round-robin. Returns the manifest path.
    """
    if not 2 <= n_classes <= len(MOTIONS):
        raise ConfigurationError("Synthetic data supports 2 to 4 classes", {'n_classes': n_classes})
    if n_train < n_classes or n_test < 0:
        raise ConfigurationError("Need at least one training clip per class",
                                 {'n_train': n_train, 'n_classes': n_classes})
    if frames_per_clip < 2:
        raise ConfigurationError("Clips need at least two frames", {'frames_per_clip': frames_per_clip})

    out_dir = Path(out_dir)
    rng = RngStream(seed).substream('data')
    clips = []
    for split, count in (('train', n_train), ('test', n_test)):
        for index in range(count):
            event = index % n_classes
            motion = MOTIONS[event]
            clip_id = f"{split}_{index:04d}"
            frames = render_clip(motion, frames_per_clip, rng.substream(f"{split}/{index}"),
                                 style, height, width)
            paths = []
            for t, frame in enumerate(frames):
                paths.append(save_frame(frame, out_dir / 'frames' / clip_id / f"{t:03d}.pgm"))
            clips.append(ClipRecord(clip_id, paths, motion.label, event, split))

    manifest = DatasetManifest('moving_blobs', n_classes, clips)
    path = write_manifest(manifest, out_dir / MANIFEST_NAME)
    logger.info(f"Synthetic dataset written: {len(clips)} clips, {n_classes} classes -> {path}")
    return path
