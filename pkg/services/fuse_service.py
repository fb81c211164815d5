#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Manifest -> fused, standardized first-layer rows on disk"""

from pathlib import Path

from config.experiment import ExperimentConfig
from converters import get_converter
from core.pipeline import FusedRows, build_fused_rows, load_manifest
from ui.display import Display
from ui.progress import clip_callback, get_training_progress
from utils.logger import get_logger

logger = get_logger()


class FuseService:
    """Build the fused-row cache for one manifest and fusion mode"""

    def __init__(self, show_progress: bool = True):
        self.show_progress = show_progress
        self.cache = get_converter('cache')
        self.display = Display()

    def build(self, manifest_path, config: ExperimentConfig) -> FusedRows:
        manifest = load_manifest(manifest_path)
        logger.info(f"Fusing '{manifest.name}' with {config.fusion_mode.value} fusion "
                    f"({config.frames_per_clip} frames per clip, {config.height}x{config.width})")
        if not self.show_progress:
            return build_fused_rows(manifest, config.fusion_mode, config.frames_per_clip,
                                    config.height, config.width)
        with get_training_progress(transient=True) as progress:
            callback = clip_callback(progress, "Loading clips", len(manifest.clips))
            return build_fused_rows(manifest, config.fusion_mode, config.frames_per_clip,
                                    config.height, config.width, progress=callback)

    def run(self, manifest_path, config: ExperimentConfig, out_dir) -> FusedRows:
        out_dir = Path(out_dir)
        fused = self.build(manifest_path, config)
        self.cache.write(fused, out_dir)
        if self.show_progress:
            self.display.show_fused_summary(fused, out_dir)
        return fused
