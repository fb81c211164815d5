#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Fused-row cache

A cache is a directory:
    meta.json                    fusion mode, class count, clip ids, geometry
    train_rows.npy               float64 rows
    train_clip_index.npy         int64 clip position per row
    train_clip_labels.npy        int64 event class per clip
    test_*.npy                   same three arrays when a test split exists
    frame_stats.ebst             per-pixel stats of training frames
    fused_stats.ebst             stats of fused training rows (aggregative only)
"""

import json
from pathlib import Path
from typing import Optional

import numpy as np

from converters.base_converter import BaseConverter
from converters.stats_converter import StatsConverter
from core.errors import DataError
from core.fusion import FusionMode
from core.pipeline import FusedRows, SplitRows

META_FILE = 'meta.json'
CACHE_VERSION = 1


class FusedCacheConverter(BaseConverter):
    """Read and write the output of the fuse command"""

    name = 'cache'

    def __init__(self):
        super().__init__()
        self.stats = StatsConverter()

    def _write_split(self, directory: Path, prefix: str, split: SplitRows) -> None:
        np.save(directory / f"{prefix}_rows.npy", split.rows)
        np.save(directory / f"{prefix}_clip_index.npy", split.clip_index)
        np.save(directory / f"{prefix}_clip_labels.npy", split.clip_labels)

    def _read_split(self, directory: Path, prefix: str, clip_ids) -> SplitRows:
        arrays = {}
        for key in ('rows', 'clip_index', 'clip_labels'):
            path = directory / f"{prefix}_{key}.npy"
            if not path.is_file():
                raise DataError("Cache is missing an array", context={'path': str(path)})
            try:
                arrays[key] = np.load(path, allow_pickle=False)
            except ValueError as e:
                raise DataError(f"Unreadable cache array: {e}", context={'path': str(path)}) from None
        split = SplitRows(arrays['rows'].astype(np.float64), arrays['clip_index'].astype(np.int64),
                          list(clip_ids), arrays['clip_labels'].astype(np.int64))
        if split.rows.ndim != 2 or split.clip_index.size != split.n_rows:
            raise DataError("Cache rows and clip index disagree",
                            context={'split': prefix, 'rows': split.rows.shape, 'index': split.clip_index.size})
        if split.clip_labels.size != len(split.clip_ids):
            raise DataError("Cache labels and clip ids disagree", context={'split': prefix})
        return split

    def write(self, fused: FusedRows, path) -> Path:
        directory = Path(path)
        directory.mkdir(parents=True, exist_ok=True)
        self._write_split(directory, 'train', fused.train)
        if fused.test is not None:
            self._write_split(directory, 'test', fused.test)
        self.stats.write(fused.frame_stats, directory / 'frame_stats.ebst')
        if fused.fused_stats is not None:
            self.stats.write(fused.fused_stats, directory / 'fused_stats.ebst')

        meta = {
            'version': CACHE_VERSION,
            'fusion_mode': fused.fusion_mode.value,
            'n_classes': fused.n_classes,
            'train_clip_ids': fused.train.clip_ids,
            'test_clip_ids': None if fused.test is None else fused.test.clip_ids,
            'extra': fused.meta,
        }
        (directory / META_FILE).write_text(json.dumps(meta, indent=2), encoding='utf-8')
        self.logger.info(f"Fused cache written: {directory} ({fused.train.n_rows} train rows)")
        return directory

    def read(self, path) -> FusedRows:
        directory = Path(path)
        meta_path = directory / META_FILE
        if not meta_path.is_file():
            raise DataError("Not a fused cache (meta.json missing)", context={'path': str(directory)})
        try:
            meta = json.loads(meta_path.read_text(encoding='utf-8'))
        except json.JSONDecodeError as e:
            raise DataError(f"Malformed cache metadata: {e}", context={'path': str(meta_path)}) from None
        if meta.get('version') != CACHE_VERSION:
            raise DataError("Unsupported cache version", context={'version': meta.get('version')})

        mode = FusionMode.parse(meta['fusion_mode'])
        train = self._read_split(directory, 'train', meta['train_clip_ids'])
        test: Optional[SplitRows] = None
        if meta.get('test_clip_ids') is not None:
            test = self._read_split(directory, 'test', meta['test_clip_ids'])
        frame_stats = self.stats.read(directory / 'frame_stats.ebst')
        fused_stats = None
        if (directory / 'fused_stats.ebst').is_file():
            fused_stats = self.stats.read(directory / 'fused_stats.ebst')
        self.logger.debug(f"Loaded fused cache {directory} ({mode.value})")
        return FusedRows(mode, int(meta['n_classes']), train, test, frame_stats, fused_stats,
                         meta=meta.get('extra', {}))
