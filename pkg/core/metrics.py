#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Accuracy, confusion matrices and aggregation over repeated runs"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import FUSION_PREFIX
from core.errors import ConfigurationError, DataError, PreconditionError


@dataclass
class RunReport:
    run_id: str
    seed: int
    fusion_mode: str
    arch_name: str
    accuracy: float
    confusion: List[List[int]]
    pretrain_seconds: float = 0.0
    finetune_seconds: float = 0.0
    pretrain_recon: Dict[str, List[float]] = field(default_factory=dict)
    finetune_losses: List[float] = field(default_factory=list)
    first_layer_rows: int = 0

    def __post_init__(self):
        if not 0.0 <= self.accuracy <= 1.0:
            raise PreconditionError("Accuracy must lie in [0, 1]", {'accuracy': self.accuracy})

    @property
    def total_seconds(self) -> float:
        return self.pretrain_seconds + self.finetune_seconds

    @property
    def group(self) -> Tuple[str, str]:
        return (self.arch_name, self.fusion_mode)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "RunReport":
        try:
            return cls(**json.loads(line))
        except (TypeError, ValueError) as e:
            raise DataError(f"Malformed run report: {e}") from None


@dataclass
class AggregateRow:
    arch_name: str
    fusion_mode: str
    runs: int
    accuracy_mean: float
    accuracy_std: float
    minutes_mean: float
    minutes_std: float

    @property
    def label(self) -> str:
        return f"{FUSION_PREFIX.get(self.fusion_mode, '')}{self.arch_name}"

    @property
    def accuracy_text(self) -> str:
        return format_mean_std(self.accuracy_mean * 100.0, self.accuracy_std * 100.0)

    @property
    def time_text(self) -> str:
        return format_mean_std(self.minutes_mean, self.minutes_std)


def format_mean_std(mean: float, std: float) -> str:
    return f"{mean:.2f} ± {std:.2f}"


def accuracy(predictions, labels) -> float:
    predictions = np.asarray(predictions).reshape(-1)
    labels = np.asarray(labels).reshape(-1)
    if predictions.size == 0:
        raise PreconditionError("Cannot score an empty prediction set")
    if predictions.size != labels.size:
        raise PreconditionError("Predictions and labels differ in length",
                                {'predictions': predictions.size, 'labels': labels.size})
    return float(np.sum(predictions == labels)) / predictions.size


def confusion_matrix(predictions, labels, n_classes: int) -> np.ndarray:
    """Rows are true classes, columns predicted classes"""
    predictions = np.asarray(predictions, dtype=np.int64).reshape(-1)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if predictions.size != labels.size:
        raise PreconditionError("Predictions and labels differ in length")
    matrix = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(matrix, (labels, predictions), 1)
    return matrix


def aggregate_runs(reports: Sequence[RunReport]) -> AggregateRow:
    """Mean and population std of accuracy and wall time over repetitions"""
    if not reports:
        raise PreconditionError("No run reports to aggregate")
    groups = {r.group for r in reports}
    if len(groups) > 1:
        raise ConfigurationError("Cannot aggregate runs of different architectures",
                                 {'groups': sorted(groups)})
    accuracies = np.sort(np.array([r.accuracy for r in reports]))
    minutes = np.sort(np.array([r.total_seconds / 60.0 for r in reports]))
    arch, fusion = reports[0].group
    return AggregateRow(arch, fusion, len(reports),
                        float(accuracies.mean()), float(accuracies.std()),
                        float(minutes.mean()), float(minutes.std()))


def group_reports(reports: Iterable[RunReport]) -> List[List[RunReport]]:
    """Split reports by (arch, fusion) keeping first-appearance order"""
    groups: Dict[Tuple[str, str], List[RunReport]] = {}
    for report in reports:
        groups.setdefault(report.group, []).append(report)
    return list(groups.values())


def append_report(report: RunReport, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'a', encoding='utf-8') as handle:
        handle.write(report.to_json() + '\n')
    return path


def discard_reports(path, run_ids: Optional[Iterable[str]] = None) -> int:
    """
    Drop earlier reports before a run writes new ones

    Removes the whole file when run_ids is None, otherwise only the lines
    whose run_id is listed. Returns the number of reports dropped.
    """
    path = Path(path)
    if not path.is_file():
        return 0
    if run_ids is None:
        dropped = sum(1 for line in path.read_text(encoding='utf-8').splitlines() if line.strip())
        path.unlink()
        return dropped
    reports = read_reports(path)
    wanted = set(run_ids)
    kept = [report for report in reports if report.run_id not in wanted]
    if len(kept) == len(reports):
        return 0
    path.write_text(''.join(report.to_json() + '\n' for report in kept), encoding='utf-8')
    return len(reports) - len(kept)


def read_reports(path) -> List[RunReport]:
    """Every report in one .jsonl file, or in all *.jsonl files under a directory"""
    path = Path(path)
    files = sorted(path.rglob('*.jsonl')) if path.is_dir() else [path]
    reports = []
    for file in files:
        if not file.is_file():
            continue
        for line in file.read_text(encoding='utf-8').splitlines():
            if line.strip():
                reports.append(RunReport.from_json(line))
    return reports
