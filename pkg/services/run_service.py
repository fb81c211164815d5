#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Full protocol: fuse once, then pretrain -> finetune -> eval per repetition

Layout under the output directory:
    rows/                  fused cache
    rep_<r>/pretrained.ebdn
    rep_<r>/model.ebdn     (+ .log.json sidecars)
    reports.jsonl          one RunReport per repetition, rewritten on every run
"""

from dataclasses import replace
from pathlib import Path
from typing import List

from config.experiment import ExperimentConfig
from converters import Checkpoint, get_converter
from core.errors import DataError
from core.metrics import RunReport, aggregate_runs, append_report, discard_reports
from services.eval_service import REPORTS_FILE, evaluate_split
from services.finetune_service import FinetuneService
from services.fuse_service import FuseService
from services.pretrain_service import PretrainService
from services.training_log import TrainingLog, save_training_log
from ui.display import Display
from utils.logger import get_logger

logger = get_logger()


class RunService:
    def __init__(self, show_progress: bool = True):
        self.show_progress = show_progress
        self.fuser = FuseService(show_progress)
        self.pretrainer = PretrainService(show_progress)
        self.finetuner = FinetuneService(show_progress)
        self.checkpoints = get_converter('checkpoint')
        self.display = Display()

    def run(self, manifest_path, config: ExperimentConfig, out_dir) -> List[RunReport]:
        out_dir = Path(out_dir)
        fused = self.fuser.run(manifest_path, config, out_dir / 'rows')
        if fused.test is None:
            raise DataError("Manifest has no 'test' clips", context={'manifest': str(manifest_path)})

        report_file = out_dir / REPORTS_FILE
        if discard_reports(report_file):
            logger.info(f"Replacing the reports of an earlier run in {out_dir}")
        reports = []
        for repetition in range(config.repetitions):
            seed = config.seed + repetition
            rep_dir = out_dir / f"rep_{repetition}"
            rep_config = replace(config, seed=seed)
            logger.info(f"Repetition {repetition + 1}/{config.repetitions} (seed {seed})")

            pretrained = self.pretrainer.train(rep_config, fused)
            pretrained_path = self.checkpoints.write(Checkpoint(pretrained.stack), rep_dir / 'pretrained.ebdn')
            log = TrainingLog(
                seed=seed,
                arch_name=pretrained.stack.arch_name,
                fusion_mode=pretrained.stack.fusion_mode.value,
                pretrain_seconds=pretrained.seconds,
                pretrain_recon={str(layer): [entry.reconstruction_error for entry in logs]
                                for layer, logs in pretrained.logs.items()},
                first_layer_rows=pretrained.first_layer_rows,
            )
            save_training_log(log, pretrained_path)

            tuned = self.finetuner.finetune_once(Checkpoint(pretrained.stack), fused, rep_config, seed)
            model_path = self.checkpoints.write(Checkpoint(tuned.stack, tuned.head, tuned.adam),
                                                rep_dir / 'model.ebdn')
            log = replace(log, finetune_seconds=tuned.seconds,
                          finetune_losses=list(tuned.batch_losses),
                          finetune_epoch_losses=[epoch.loss for epoch in tuned.epochs],
                          frozen_layers=sorted(config.frozen_layers))
            save_training_log(log, model_path)

            report = evaluate_split(Checkpoint(tuned.stack, tuned.head), fused.test, fused.n_classes,
                                    f"rep_{repetition}", log, seed)
            append_report(report, report_file)
            reports.append(report)
            logger.info(f"Repetition {repetition + 1}: clip accuracy {report.accuracy * 100:.2f}%")

        summary = aggregate_runs(reports)
        logger.info(f"{summary.label}: accuracy {summary.accuracy_text}% over {summary.runs} runs")
        if self.show_progress:
            self.display.show_report([summary])
        return reports
