#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""JSON sidecar that travels with every checkpoint"""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from core.errors import DataError

SIDECAR_SUFFIX = '.log.json'


@dataclass
class TrainingLog:
    seed: int
    arch_name: str
    fusion_mode: str
    pretrain_seconds: float = 0.0
    finetune_seconds: float = 0.0
    # layer index (as text) -> reconstruction error per epoch
    pretrain_recon: Dict[str, List[float]] = field(default_factory=dict)
    finetune_losses: List[float] = field(default_factory=list)
    finetune_epoch_losses: List[float] = field(default_factory=list)
    first_layer_rows: int = 0
    frozen_layers: List[int] = field(default_factory=list)


def sidecar_path(checkpoint_path) -> Path:
    path = Path(checkpoint_path)
    return path.with_name(path.name + SIDECAR_SUFFIX)


def save_training_log(log: TrainingLog, checkpoint_path) -> Path:
    path = sidecar_path(checkpoint_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(asdict(log), indent=2, sort_keys=True), encoding='utf-8')
    return path


def load_training_log(checkpoint_path) -> Optional[TrainingLog]:
    """The sidecar of a checkpoint, or None when it was never written"""
    path = sidecar_path(checkpoint_path)
    if not path.is_file():
        return None
    try:
        return TrainingLog(**json.loads(path.read_text(encoding='utf-8')))
    except (TypeError, ValueError) as e:
        raise DataError(f"Malformed training log: {e}", context={'path': str(path)}) from None
