#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Head attachment and supervised fine-tuning

With repetitions > 1 the pre-trained stack is fine-tuned once per
repetition, each with its own head initialization and batch order
(seed = base seed + repetition index). When the cache holds a test split
every repetition is scored and a RunReport line is appended to
reports.jsonl beside the checkpoints. Reports an earlier fine-tuning left
for the same checkpoints are dropped first.
"""

from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional

from config.experiment import ExperimentConfig
from converters import Checkpoint, get_converter
from core.errors import ConfigurationError
from core.head import FinetuneConfig, FinetuneResult, build_head, finetune, fit_head_init
from core.metrics import RunReport, append_report, discard_reports
from core.numerics import RngStream
from core.pipeline import FusedRows
from services.eval_service import REPORTS_FILE, evaluate_split
from services.training_log import TrainingLog, load_training_log, save_training_log
from ui.display import Display
from ui.progress import clip_callback, get_training_progress
from utils.logger import get_logger

logger = get_logger()


@dataclass
class FinetuneOutcome:
    repetition: int
    seed: int
    result: FinetuneResult
    checkpoint_path: Path
    report: Optional[RunReport] = None


def repetition_path(out_path: Path, repetition: int, repetitions: int) -> Path:
    """out_path itself for a single run, out_path/rep_<r>.ebdn otherwise"""
    if repetitions == 1:
        return out_path
    return out_path / f"rep_{repetition}.ebdn"


class FinetuneService:
    """Fine-tune a pre-trained checkpoint, optionally several times"""

    def __init__(self, show_progress: bool = True):
        self.show_progress = show_progress
        self.cache = get_converter('cache')
        self.checkpoints = get_converter('checkpoint')
        self.display = Display()

    @staticmethod
    def finetune_config(config: ExperimentConfig) -> FinetuneConfig:
        return FinetuneConfig(
            head_lr=config.head_lr,
            unfrozen_dbn_lr=config.unfrozen_dbn_lr,
            frozen_layers=frozenset(config.frozen_layers),
            epochs=config.finetune_epochs,
            batch_size=config.finetune_batch_size,
        )

    def finetune_once(self, pretrained: Checkpoint, fused: FusedRows, config: ExperimentConfig,
                      seed: int) -> FinetuneResult:
        rng = RngStream(seed)
        head = build_head(pretrained.stack.top_dim, fused.n_classes, rng, strict=config.strict_head)
        cfg = self.finetune_config(config)
        rows, labels = fused.train.rows, fused.train.labels
        if config.head_init == 'fitted':
            head = fit_head_init(pretrained.stack, head, rows, labels)
        if not self.show_progress:
            return finetune(pretrained.stack, head, cfg, rows, labels, rng)
        with get_training_progress() as progress:
            callback = clip_callback(progress, f"Fine-tuning (seed {seed})", rows.shape[0] * cfg.epochs)
            return finetune(pretrained.stack, head, cfg, rows, labels, rng, progress=callback)

    def run(self, checkpoint_path, rows_dir, config: ExperimentConfig, out_path) -> List[FinetuneOutcome]:
        checkpoint_path = Path(checkpoint_path)
        out_path = Path(out_path)
        pretrained = self.checkpoints.read(checkpoint_path)
        config.resolve_arch(pretrained.stack.arch_name)
        fused = self.cache.read(rows_dir)
        config.resolve_fusion(pretrained.stack.fusion_mode)
        if fused.fusion_mode is not pretrained.stack.fusion_mode:
            raise ConfigurationError("Cache and checkpoint use different fusion modes",
                                     {'cache': fused.fusion_mode.value,
                                      'checkpoint': pretrained.stack.fusion_mode.value})
        if pretrained.head:
            logger.warning(f"{checkpoint_path.name} already has a head; it is replaced by a fresh one")
        pretrain_log = load_training_log(checkpoint_path) or TrainingLog(
            seed=config.seed, arch_name=pretrained.stack.arch_name,
            fusion_mode=pretrained.stack.fusion_mode.value)

        report_file = (out_path.parent if config.repetitions == 1 else out_path) / REPORTS_FILE
        # A single run shares its directory with other checkpoints
        dropped = discard_reports(report_file, [out_path.stem] if config.repetitions == 1 else None)
        if dropped:
            logger.info(f"Replacing {dropped} earlier report(s) in {report_file}")
        outcomes = []
        for repetition in range(config.repetitions):
            seed = config.seed + repetition
            logger.info(f"Fine-tuning repetition {repetition + 1}/{config.repetitions} (seed {seed})")
            result = self.finetune_once(pretrained, fused, config, seed)

            path = repetition_path(out_path, repetition, config.repetitions)
            self.checkpoints.write(Checkpoint(result.stack, result.head, result.adam), path)
            log = replace(
                pretrain_log,
                seed=seed,
                finetune_seconds=result.seconds,
                finetune_losses=list(result.batch_losses),
                finetune_epoch_losses=[epoch.loss for epoch in result.epochs],
                frozen_layers=sorted(config.frozen_layers),
            )
            save_training_log(log, path)

            outcome = FinetuneOutcome(repetition, seed, result, path)
            if fused.test is not None:
                outcome.report = evaluate_split(Checkpoint(result.stack, result.head), fused.test,
                                                fused.n_classes, path.stem, log, seed)
                append_report(outcome.report, report_file)
                logger.info(f"Repetition {repetition + 1}: clip accuracy {outcome.report.accuracy * 100:.2f}%")
            outcomes.append(outcome)

        if self.show_progress:
            self.display.show_finetune_summary([o.result for o in outcomes],
                                               [o.checkpoint_path for o in outcomes])
        return outcomes
