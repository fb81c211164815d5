#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Checkpoint inspection"""

from pathlib import Path

from converters import Checkpoint, get_converter
from services.training_log import load_training_log
from ui.display import Display, console
from utils.logger import get_logger

logger = get_logger()


class InfoService:
    """Show what a checkpoint contains without touching any data"""

    def __init__(self, show_output: bool = True):
        self.show_output = show_output
        self.checkpoints = get_converter('checkpoint')
        self.display = Display()

    def run(self, checkpoint_path) -> Checkpoint:
        checkpoint_path = Path(checkpoint_path)
        checkpoint = self.checkpoints.read(checkpoint_path)
        logger.info(f"Inspecting {checkpoint_path}: {checkpoint.stack.arch_name} "
                    f"{checkpoint.stack.sizes}, head {[layer.n_out for layer in checkpoint.head]}")
        if self.show_output:
            log = load_training_log(checkpoint_path)
            self.display.show_checkpoint_info(checkpoint, checkpoint_path,
                                              None if log is None else log.frozen_layers)
            if log is not None:
                console.print(f"[dim]seed {log.seed} • pre-training {log.pretrain_seconds:.1f}s • "
                              f"fine-tuning {log.finetune_seconds:.1f}s[/dim]\n")
        return checkpoint
