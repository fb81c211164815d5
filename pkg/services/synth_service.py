#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Write the moving-blob toy dataset"""

from pathlib import Path

from config.experiment import ExperimentConfig
from core.synthetic import make_moving_blob_dataset
from ui.display import Display


class SynthService:
    def __init__(self, show_output: bool = True):
        self.show_output = show_output
        self.display = Display()

    def run(self, out_dir, config: ExperimentConfig, n_train: int = 60, n_test: int = 30,
            n_classes: int = 3, frames_per_clip: int = 12) -> Path:
        manifest = make_moving_blob_dataset(out_dir, n_train, n_test, n_classes, config.seed,
                                            frames_per_clip, config.height, config.width)
        if self.show_output:
            self.display.show_success(f"{n_train + n_test} clips, {n_classes} classes\n{manifest}",
                                      "Synthetic dataset")
        return manifest
