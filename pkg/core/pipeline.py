#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Dataset ingestion

Manifest -> uniform frame sampling -> PGM decode -> border trim -> bilinear
resize -> train-only z-scoring -> fusion -> mini-batches.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from PIL import Image

from config.settings import BATCH_SIZE, BORDER_THRESHOLD, FRAME_HEIGHT, FRAME_WIDTH, FRAMES_PER_CLIP
from core.errors import DataError, PreconditionError
from core.fusion import FrameTensor, FusionMode, fuse, standardize_values
from core.numerics import RngStream, as_matrix
from utils.logger import get_logger

logger = get_logger()

SPLITS = ('train', 'test')
MANIFEST_FIELDS = ('clip_id', 'frames', 'action', 'event', 'split')


@dataclass
class ClipRecord:
    clip_id: str
    frame_paths: List[Path]
    action_label: str
    event_class: int
    split: str


@dataclass
class FrameStats:
    """Per-feature mean and population standard deviation"""

    mean: np.ndarray
    std: np.ndarray

    @property
    def features(self) -> int:
        return self.mean.size


@dataclass
class DatasetManifest:
    name: str
    n_classes: int
    clips: List[ClipRecord]
    stats: Optional[FrameStats] = None
    path: Optional[Path] = None

    def split(self, split: str) -> List[ClipRecord]:
        return [clip for clip in self.clips if clip.split == split]

    def require_splits(self, *splits: str) -> None:
        for split in splits:
            if not self.split(split):
                raise DataError(f"Manifest has no '{split}' clips", context={'manifest': self.name})


@dataclass
class BatchPlan:
    batch_size: int = BATCH_SIZE
    shuffle_seed: int = 0


# -------- Manifest --------

def _parse_directive(text: str, manifest_vars: Dict[str, str]) -> None:
    body = text[1:].strip()
    if '=' in body:
        key, value = body.split('=', 1)
        manifest_vars[key.strip()] = value.strip()


def load_manifest(path) -> DatasetManifest:
    """
    Read a tab-separated manifest

    Lines starting with '#' are comments, except '#key=value' directives
    (name, n_classes). Each record holds clip_id, ';'-joined frame paths
    (relative to the manifest), action label, event class and split.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError("Manifest not found", context={'path': str(path)})

    directives: Dict[str, str] = {}
    records = []
    with open(path, 'r', encoding='utf-8') as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.rstrip('\r\n')
            if not line.strip():
                continue
            if line.startswith('#'):
                _parse_directive(line, directives)
                continue
            records.append((line_no, line.split('\t')))

    try:
        n_classes = int(directives.get('n_classes', ''))
    except ValueError:
        raise DataError("Manifest must declare '#n_classes=<int>'", context={'path': str(path)}) from None
    if n_classes < 2:
        raise DataError("Manifest needs at least two classes", context={'n_classes': n_classes})

    base = path.parent
    clips: List[ClipRecord] = []
    seen: Dict[str, int] = {}
    for line_no, fields in records:
        if len(fields) != len(MANIFEST_FIELDS):
            raise DataError(
                f"Expected {len(MANIFEST_FIELDS)} tab-separated fields, found {len(fields)}",
                line=line_no
            )
        clip_id, frames, action, event, split = (f.strip() for f in fields)
        if not clip_id:
            raise DataError("Empty clip_id", line=line_no)
        if clip_id in seen:
            raise DataError(f"Duplicate clip_id '{clip_id}' (first seen on line {seen[clip_id]})",
                            clip_id=clip_id, line=line_no)
        seen[clip_id] = line_no
        try:
            event_class = int(event)
        except ValueError:
            raise DataError(f"Event class '{event}' is not an integer", clip_id=clip_id, line=line_no) from None
        if not 0 <= event_class < n_classes:
            raise DataError(f"Event class {event_class} outside [0, {n_classes})",
                            clip_id=clip_id, line=line_no)
        if split not in SPLITS:
            raise DataError(f"Unknown split '{split}'", clip_id=clip_id, line=line_no)
        frame_paths = [base / p for p in frames.split(';') if p]
        if not frame_paths:
            raise DataError("Clip lists no frames", clip_id=clip_id, line=line_no)
        for frame_path in frame_paths:
            if not frame_path.is_file():
                raise DataError(f"Frame file not found: {frame_path}", clip_id=clip_id, line=line_no)
        clips.append(ClipRecord(clip_id, frame_paths, action, event_class, split))

    name = directives.get('name', path.stem)
    logger.info(f"Loaded manifest '{name}': {len(clips)} clips, {n_classes} classes")
    return DatasetManifest(name, n_classes, clips, path=path)


def write_manifest(manifest: DatasetManifest, path) -> Path:
    """Write a manifest; frame paths are stored relative to its directory"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    base = path.parent.resolve()
    lines = [f"#name={manifest.name}", f"#n_classes={manifest.n_classes}"]
    for clip in manifest.clips:
        try:
            frames = ';'.join(Path(p).resolve().relative_to(base).as_posix() for p in clip.frame_paths)
        except ValueError:
            raise DataError("Frames must live under the manifest directory", clip_id=clip.clip_id,
                            context={'manifest_dir': str(base)}) from None
        lines.append('\t'.join([clip.clip_id, frames, clip.action_label, str(clip.event_class), clip.split]))
    path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
    return path


# -------- Frames --------

def sample_frames_uniform(clip: ClipRecord, k: int = FRAMES_PER_CLIP) -> List[Path]:
    """k frames at indices round(i (N-1) / (k-1)), rounding halves up"""
    n = len(clip.frame_paths)
    if n == 0:
        raise PreconditionError("Clip has no frames", {'clip_id': clip.clip_id})
    if k < 1:
        raise PreconditionError("Need at least one sampled frame", {'k': k})
    if k == 1:
        return [clip.frame_paths[0]]
    indices = [int(math.floor(i * (n - 1) / (k - 1) + 0.5)) for i in range(k)]
    return [clip.frame_paths[i] for i in indices]


_TOKEN = re.compile(rb'\s*(?:#[^\n]*\n\s*)*(\S+)')


def load_frame(path) -> FrameTensor:
    """Decode an 8-bit binary PGM (P5, maxval 255) scaled to [0, 1]"""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise DataError(f"Cannot read frame: {e}", context={'path': str(path)}) from None

    if data[:2] != b'P5':
        raise DataError("Not a binary PGM (expected magic P5)",
                        context={'path': str(path), 'magic': data[:2].decode('latin-1')})
    pos = 2
    header = []
    for _ in range(3):
        match = _TOKEN.match(data, pos)
        if match is None:
            raise DataError("Malformed PGM header", context={'path': str(path)})
        header.append(match.group(1))
        pos = match.end()
    try:
        width, height, maxval = (int(tok) for tok in header)
    except ValueError:
        raise DataError("Malformed PGM header", context={'path': str(path)}) from None
    if width < 1 or height < 1:
        raise DataError("PGM has empty dimensions", context={'path': str(path)})
    if maxval != 255:
        raise DataError("Unsupported PGM maxval (only 255)", context={'path': str(path), 'maxval': maxval})
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise DataError("Malformed PGM header", context={'path': str(path)})
    payload = data[pos + 1:]
    expected = width * height
    if len(payload) < expected:
        raise DataError("Truncated PGM payload",
                        context={'path': str(path), 'expected': expected, 'found': len(payload)})

    image = Image.frombytes('L', (width, height), payload[:expected])
    values = np.asarray(image, dtype=np.float64) / 255.0
    return FrameTensor.from_image(values)


def save_frame(frame: FrameTensor, path) -> Path:
    """Write a [0, 1] frame as 8-bit P5 PGM"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pixels = np.clip(np.rint(frame.as_image() * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(pixels).save(path, format='PPM')
    return path


def trim_black_borders(frame: FrameTensor, threshold: float = BORDER_THRESHOLD) -> FrameTensor:
    """Drop leading/trailing rows and columns whose maximum is <= threshold"""
    image = frame.as_image()
    bright_rows = np.flatnonzero(image.max(axis=1) > threshold)
    bright_cols = np.flatnonzero(image.max(axis=0) > threshold)
    if bright_rows.size == 0 or bright_cols.size == 0:
        return frame
    cropped = image[bright_rows[0]:bright_rows[-1] + 1, bright_cols[0]:bright_cols[-1] + 1]
    return FrameTensor.from_image(cropped.copy())


def resize_bilinear(frame: FrameTensor, height: int = FRAME_HEIGHT, width: int = FRAME_WIDTH) -> FrameTensor:
    """Corner-aligned bilinear resampling"""
    if frame.height < 2 or frame.width < 2:
        raise DataError("Frame too small to resize", context={'shape': frame.shape})
    if height < 1 or width < 1:
        raise PreconditionError("Target size must be positive", {'height': height, 'width': width})
    image = frame.as_image()
    if frame.shape == (height, width):
        return FrameTensor(height, width, image.copy())

    ys = np.linspace(0.0, frame.height - 1, height) if height > 1 else np.zeros(1)
    xs = np.linspace(0.0, frame.width - 1, width) if width > 1 else np.zeros(1)
    y0 = np.minimum(np.floor(ys).astype(int), frame.height - 2)
    x0 = np.minimum(np.floor(xs).astype(int), frame.width - 2)
    wy = (ys - y0)[:, np.newaxis]
    wx = (xs - x0)[np.newaxis, :]

    top_left = image[np.ix_(y0, x0)]
    top_right = image[np.ix_(y0, x0 + 1)]
    bottom_left = image[np.ix_(y0 + 1, x0)]
    bottom_right = image[np.ix_(y0 + 1, x0 + 1)]
    top = top_left * (1.0 - wx) + top_right * wx
    bottom = bottom_left * (1.0 - wx) + bottom_right * wx
    out = top * (1.0 - wy) + bottom * wy
    # Keep results inside the source range despite rounding
    out = np.clip(out, image.min(), image.max())
    return FrameTensor.from_image(out)


def preprocess_clip(clip: ClipRecord, k: int = FRAMES_PER_CLIP,
                    height: int = FRAME_HEIGHT, width: int = FRAME_WIDTH) -> List[FrameTensor]:
    """Sample, decode, trim and resize the frames of one clip"""
    frames = []
    for frame_path in sample_frames_uniform(clip, k):
        try:
            frame = load_frame(frame_path)
            frame = trim_black_borders(frame)
            frames.append(resize_bilinear(frame, height, width))
        except DataError as e:
            e.context.setdefault('clip_id', clip.clip_id)
            e.clip_id = clip.clip_id
            raise
    return frames


# -------- Statistics --------

def compute_stats(rows) -> FrameStats:
    """Per-feature mean and population std (divisor N)"""
    rows = as_matrix(rows)
    if rows.shape[0] < 2:
        raise PreconditionError("Need at least two rows for statistics", {'rows': rows.shape[0]})
    mean = rows.mean(axis=0)
    std = np.sqrt(np.mean((rows - mean) ** 2, axis=0))
    return FrameStats(mean, std)


def standardize_rows(rows, stats: FrameStats) -> np.ndarray:
    rows = as_matrix(rows)
    if rows.shape[1] != stats.features:
        raise PreconditionError("Statistics do not match row width",
                                {'rows': rows.shape[1], 'stats': stats.features})
    return standardize_values(rows, stats.mean, stats.std)


# -------- Batching --------

def batch_indices(n_rows: int, plan: BatchPlan) -> List[np.ndarray]:
    """Seeded shuffle split into consecutive batches of plan.batch_size"""
    if n_rows < 1:
        raise PreconditionError("Cannot batch an empty row set")
    order = RngStream(plan.shuffle_seed).substream('shuffle').permutation(n_rows)
    return [order[start:start + plan.batch_size] for start in range(0, n_rows, plan.batch_size)]


def make_batches(rows, plan: BatchPlan) -> List[np.ndarray]:
    rows = as_matrix(rows)
    return [rows[index] for index in batch_indices(rows.shape[0], plan)]


# -------- Fused rows --------

@dataclass
class SplitRows:
    """Rows of one split plus the clip each row came from"""

    rows: np.ndarray
    clip_index: np.ndarray
    clip_ids: List[str]
    clip_labels: np.ndarray

    @property
    def labels(self) -> np.ndarray:
        return self.clip_labels[self.clip_index]

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]


@dataclass
class FusedRows:
    fusion_mode: FusionMode
    n_classes: int
    train: SplitRows
    test: Optional[SplitRows]
    frame_stats: FrameStats
    fused_stats: Optional[FrameStats] = None
    meta: dict = field(default_factory=dict)


def _fuse_split(frames_by_clip: Sequence[np.ndarray], clips: Sequence[ClipRecord],
                mode: FusionMode, stats: FrameStats, height: int, width: int) -> SplitRows:
    rows, clip_index = [], []
    for position, (clip, stack) in enumerate(zip(clips, frames_by_clip)):
        standardized = standardize_rows(stack, stats)
        frames = [FrameTensor(height, width, row) for row in standardized]
        try:
            fused = fuse(frames, mode)
        except (DataError, PreconditionError) as e:
            e.context.setdefault('clip_id', clip.clip_id)
            raise
        rows.extend(f.values for f in fused)
        clip_index.extend([position] * len(fused))
    return SplitRows(
        np.vstack(rows) if rows else np.zeros((0, height * width)),
        np.asarray(clip_index, dtype=np.int64),
        [clip.clip_id for clip in clips],
        np.asarray([clip.event_class for clip in clips], dtype=np.int64),
    )


def build_fused_rows(manifest: DatasetManifest, mode: FusionMode,
                     k: int = FRAMES_PER_CLIP, height: int = FRAME_HEIGHT, width: int = FRAME_WIDTH,
                     progress: Optional[Callable[[int], None]] = None) -> FusedRows:
    """
    Turn a manifest into standardized first-layer rows

    Frame statistics come from training frames only. Aggregative sums are
    re-standardized with statistics of the fused training rows.
    """
    mode = FusionMode(mode)
    manifest.require_splits('train')
    train_clips = manifest.split('train')
    test_clips = manifest.split('test')

    def load(clips):
        stacks = []
        for clip in clips:
            frames = preprocess_clip(clip, k, height, width)
            stacks.append(np.vstack([f.values for f in frames]))
            if progress is not None:
                progress(1)
        return stacks

    train_frames = load(train_clips)
    test_frames = load(test_clips)

    frame_stats = compute_stats(np.vstack(train_frames))
    train = _fuse_split(train_frames, train_clips, mode, frame_stats, height, width)
    test = _fuse_split(test_frames, test_clips, mode, frame_stats, height, width) if test_clips else None

    fused_stats = None
    if mode is FusionMode.AGGREGATIVE:
        fused_stats = compute_stats(train.rows)
        train.rows = standardize_rows(train.rows, fused_stats)
        if test is not None:
            test.rows = standardize_rows(test.rows, fused_stats)

    logger.info(
        f"Fused '{manifest.name}' in {mode.value} mode: "
        f"{train.n_rows} train rows, {0 if test is None else test.n_rows} test rows"
    )
    return FusedRows(mode, manifest.n_classes, train, test, frame_stats, fused_stats,
                     meta={'manifest': manifest.name, 'frames_per_clip': k,
                           'height': height, 'width': width})
