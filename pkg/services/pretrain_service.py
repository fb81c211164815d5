#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Greedy DBN pre-training from a fused-row cache"""

from pathlib import Path

from config.experiment import ExperimentConfig
from converters import Checkpoint, get_converter
from core.dbn import DbnStack, PretrainResult, build_custom_stack, pretrain_greedy, total_rows_processed
from core.errors import ConfigurationError
from core.numerics import RngStream
from core.pipeline import FusedRows
from services.training_log import TrainingLog, save_training_log
from ui.display import Display
from ui.progress import get_training_progress, layer_callback
from utils.logger import get_logger

logger = get_logger()


class PretrainService:
    """Build the configured stack, train it layer by layer and save it"""

    def __init__(self, show_progress: bool = True):
        self.show_progress = show_progress
        self.cache = get_converter('cache')
        self.checkpoints = get_converter('checkpoint')
        self.display = Display()

    def build_stack(self, config: ExperimentConfig, fused: FusedRows, rng: RngStream) -> DbnStack:
        plan = config.layer_plan()
        fusion_mode = config.resolve_fusion(fused.fusion_mode)
        input_dim = fused.train.rows.shape[1]
        if input_dim != config.input_dim:
            raise ConfigurationError("Fused rows do not match the configured frame size",
                                     {'rows': input_dim, 'configured': config.input_dim})
        return build_custom_stack(plan['hidden'], plan['momentum'], plan['learning_rate'],
                                  fusion_mode, input_dim, rng, config.arch_name,
                                  config.pretrain_epochs, config.pretrain_batch_size, config.k)

    def train(self, config: ExperimentConfig, fused: FusedRows) -> PretrainResult:
        rng = RngStream(config.seed)
        stack = self.build_stack(config, fused, rng)
        rows = fused.train.rows
        logger.info(f"Pre-training {stack.arch_name} {stack.sizes} on {rows.shape[0]} "
                    f"{stack.fusion_mode.value} rows (seed {config.seed})")
        if not self.show_progress:
            result = pretrain_greedy(stack, rows, rng)
        else:
            # Deeper layers see as many rows as the first one
            layer_rows = [rows.shape[0]] * len(stack.layers)
            epochs = [cfg.epochs for cfg in stack.per_layer_cd]
            with get_training_progress() as progress:
                callback = layer_callback(progress, layer_rows, epochs)
                result = pretrain_greedy(stack, rows, rng, progress=callback)
        first_layer, total = total_rows_processed(result)
        logger.info(f"Pre-training processed {first_layer} first-layer rows per epoch, "
                    f"{total} rows across all layers ({result.seconds:.2f}s)")
        return result

    def run(self, rows_dir, config: ExperimentConfig, out_path) -> PretrainResult:
        out_path = Path(out_path)
        fused = self.cache.read(rows_dir)
        result = self.train(config, fused)
        self.checkpoints.write(Checkpoint(result.stack), out_path)
        save_training_log(TrainingLog(
            seed=config.seed,
            arch_name=result.stack.arch_name,
            fusion_mode=result.stack.fusion_mode.value,
            pretrain_seconds=result.seconds,
            pretrain_recon={str(layer): [log.reconstruction_error for log in logs]
                            for layer, logs in result.logs.items()},
            first_layer_rows=result.first_layer_rows,
        ), out_path)
        logger.info(f"Pre-training finished in {result.seconds:.1f}s")
        if self.show_progress:
            self.display.show_pretrain_summary(result, out_path)
        return result
