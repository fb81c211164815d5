#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Clip-level evaluation of a fine-tuned checkpoint"""

from pathlib import Path
from typing import Optional

from config.experiment import ExperimentConfig
from converters import Checkpoint, get_converter
from core.errors import ConfigurationError, DataError
from core.fusion import FusionMode
from core.head import predict_clip
from core.metrics import RunReport, accuracy, append_report, confusion_matrix
from core.pipeline import FusedRows, SplitRows, build_fused_rows, load_manifest
from services.training_log import TrainingLog, load_training_log
from ui.display import Display
from utils.logger import get_logger

logger = get_logger()

REPORTS_FILE = 'reports.jsonl'


def evaluate_split(checkpoint: Checkpoint, split: SplitRows, n_classes: int, run_id: str,
                   log: Optional[TrainingLog] = None, seed: Optional[int] = None) -> RunReport:
    """Vote per clip, then score against the clip labels"""
    if not checkpoint.head:
        raise ConfigurationError("Checkpoint has no classification head; run finetune first")
    if checkpoint.head[-1].n_out != n_classes:
        raise ConfigurationError("Head output size does not match the dataset classes",
                                 {'head': checkpoint.head[-1].n_out, 'n_classes': n_classes})
    predictions = predict_clip(checkpoint.stack, checkpoint.head, split.rows, split.clip_index,
                               len(split.clip_ids))
    score = accuracy(predictions, split.clip_labels)
    matrix = confusion_matrix(predictions, split.clip_labels, n_classes)
    log = log or TrainingLog(seed=seed or 0, arch_name=checkpoint.stack.arch_name,
                             fusion_mode=checkpoint.stack.fusion_mode.value)
    return RunReport(
        run_id=run_id,
        seed=log.seed if seed is None else seed,
        fusion_mode=checkpoint.stack.fusion_mode.value,
        arch_name=checkpoint.stack.arch_name,
        accuracy=score,
        confusion=matrix.tolist(),
        pretrain_seconds=log.pretrain_seconds,
        finetune_seconds=log.finetune_seconds,
        pretrain_recon=log.pretrain_recon,
        finetune_losses=log.finetune_epoch_losses,
        first_layer_rows=log.first_layer_rows,
    )


class EvalService:
    """Score a checkpoint on the test split of a cache or manifest"""

    def __init__(self, show_output: bool = True):
        self.show_output = show_output
        self.cache = get_converter('cache')
        self.checkpoints = get_converter('checkpoint')
        self.display = Display()

    def load_rows(self, config: ExperimentConfig, fusion_mode: FusionMode,
                  rows_dir=None, manifest_path=None) -> FusedRows:
        if rows_dir is not None:
            fused = self.cache.read(rows_dir)
            if fused.fusion_mode is not fusion_mode:
                raise ConfigurationError("Cache and checkpoint use different fusion modes",
                                         {'cache': fused.fusion_mode.value, 'checkpoint': fusion_mode.value})
            return fused
        if manifest_path is None:
            raise ConfigurationError("Evaluation needs --rows or --manifest")
        manifest = load_manifest(manifest_path)
        return build_fused_rows(manifest, fusion_mode, config.frames_per_clip, config.height, config.width)

    def run(self, checkpoint_path, config: ExperimentConfig, rows_dir=None, manifest_path=None,
            report_path=None) -> RunReport:
        checkpoint_path = Path(checkpoint_path)
        checkpoint = self.checkpoints.read(checkpoint_path)
        config.resolve_arch(checkpoint.stack.arch_name)
        fusion_mode = config.resolve_fusion(checkpoint.stack.fusion_mode)
        fused = self.load_rows(config, fusion_mode, rows_dir, manifest_path)
        if fused.test is None:
            raise DataError("No test split to evaluate", context={'checkpoint': str(checkpoint_path)})

        log = load_training_log(checkpoint_path)
        report = evaluate_split(checkpoint, fused.test, fused.n_classes, checkpoint_path.stem, log)
        logger.info(f"Clip accuracy of {checkpoint_path.name}: {report.accuracy * 100:.2f}% "
                    f"on {len(fused.test.clip_ids)} test clips")
        if report_path is not None:
            append_report(report, report_path)
        if self.show_output:
            self.display.show_run_report(report)
        return report
