#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Greedy layer-wise stacks of RBMs"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import ARCH_PRESETS, BATCH_SIZE, CD_STEPS, INPUT_DIM, PRETRAIN_EPOCHS
from core.errors import ConfigurationError, DivergenceError, PreconditionError
from core.fusion import FusionMode
from core.numerics import RngStream, all_finite, as_matrix
from core.rbm import CdConfig, EpochLog, RbmParams, VisibleKind, hidden_conditional, init_params, train_rbm
from utils.logger import get_logger

logger = get_logger()

CUSTOM_ARCH = 'custom'


@dataclass
class DbnStack:
    layers: List[RbmParams]
    fusion_mode: FusionMode
    per_layer_cd: List[CdConfig]
    arch_name: str = CUSTOM_ARCH

    def __post_init__(self):
        self.fusion_mode = FusionMode(self.fusion_mode)
        self.validate()

    def validate(self) -> None:
        if not self.layers:
            raise ConfigurationError("A stack needs at least one layer")
        if len(self.per_layer_cd) != len(self.layers):
            raise ConfigurationError("One CD configuration per layer is required",
                                     {'layers': len(self.layers), 'configs': len(self.per_layer_cd)})
        if self.layers[0].visible_kind is not VisibleKind.GAUSSIAN:
            raise ConfigurationError("First layer must have gaussian visible units")
        for index, (lower, upper) in enumerate(zip(self.layers[:-1], self.layers[1:]), start=1):
            if upper.visible_kind is not VisibleKind.BERNOULLI:
                raise ConfigurationError("Deeper layers must have bernoulli visible units", {'layer': index})
            if lower.n_hidden != upper.n_visible:
                raise ConfigurationError(
                    "Hidden size of a layer must equal visible size of the next",
                    {'layer': index, 'hidden': lower.n_hidden, 'visible': upper.n_visible}
                )

    @property
    def input_dim(self) -> int:
        return self.layers[0].n_visible

    @property
    def top_dim(self) -> int:
        return self.layers[-1].n_hidden

    @property
    def sizes(self) -> List[int]:
        return [self.input_dim] + [layer.n_hidden for layer in self.layers]

    def copy(self) -> "DbnStack":
        return DbnStack([layer.copy() for layer in self.layers], self.fusion_mode,
                        list(self.per_layer_cd), self.arch_name)

    def fingerprints(self) -> List[str]:
        return [layer.fingerprint() for layer in self.layers]


@dataclass
class PretrainResult:
    stack: DbnStack
    logs: Dict[int, List[EpochLog]] = field(default_factory=dict)
    seconds: float = 0.0
    first_layer_rows: int = 0


def build_custom_stack(hidden: Sequence[int], momenta: Sequence[float], learning_rates: Sequence[float],
                       fusion_mode: FusionMode, input_dim: int, rng: Optional[RngStream] = None,
                       arch_name: str = CUSTOM_ARCH, epochs: int = PRETRAIN_EPOCHS,
                       batch_size: int = BATCH_SIZE, k: int = CD_STEPS) -> DbnStack:
    if not (len(hidden) == len(momenta) == len(learning_rates)) or not hidden:
        raise ConfigurationError("Hidden sizes, momenta and learning rates must align",
                                 {'hidden': len(hidden), 'momenta': len(momenta), 'lrs': len(learning_rates)})
    if input_dim < 1:
        raise ConfigurationError("Input dimension must be positive", {'input_dim': input_dim})
    rng = rng or RngStream(0)
    weights_rng = rng.substream('weights')
    layers, configs = [], []
    visible = input_dim
    for index, (size, momentum, lr) in enumerate(zip(hidden, momenta, learning_rates)):
        kind = VisibleKind.GAUSSIAN if index == 0 else VisibleKind.BERNOULLI
        layers.append(init_params(visible, int(size), kind, weights_rng.substream(index)))
        configs.append(CdConfig(k=k, learning_rate=float(lr), momentum=float(momentum),
                                batch_size=batch_size, epochs=epochs))
        visible = int(size)
    return DbnStack(layers, FusionMode(fusion_mode), configs, arch_name)


def build_stack(arch_name: str, fusion_mode: FusionMode, input_dim: int = INPUT_DIM,
                rng: Optional[RngStream] = None, epochs: int = PRETRAIN_EPOCHS,
                batch_size: int = BATCH_SIZE, k: int = CD_STEPS) -> DbnStack:
    """Instantiate one of the preset architectures"""
    preset = ARCH_PRESETS.get(str(arch_name).lower())
    if preset is None:
        raise ConfigurationError(f"Unknown architecture '{arch_name}'",
                                 {'choices': ', '.join(ARCH_PRESETS)})
    return build_custom_stack(preset['hidden'], preset['momentum'], preset['learning_rate'],
                              fusion_mode, input_dim, rng, str(arch_name).lower(), epochs, batch_size, k)


def propagate_up(stack: DbnStack, rows, depth: Optional[int] = None) -> np.ndarray:
    """Mean-field hidden probabilities through the first `depth` layers (all by default)"""
    rows = as_matrix(rows)
    if rows.shape[1] != stack.input_dim:
        raise PreconditionError("Rows do not match the first layer",
                                {'expected': stack.input_dim, 'found': rows.shape[1]})
    depth = len(stack.layers) if depth is None else depth
    activity = rows
    for layer in stack.layers[:depth]:
        activity = hidden_conditional(layer, activity)
    return activity


def pretrain_greedy(stack: DbnStack, rows, rng: RngStream,
                    progress: Optional[Callable[[int, int], None]] = None) -> PretrainResult:
    """
    Train layers bottom-up; each layer sees the frozen probabilities below it

    Args:
        progress: called as progress(layer_index, rows_done) after every batch
    """
    rows = as_matrix(rows)
    if rows.shape[1] != stack.input_dim:
        raise PreconditionError("Rows do not match the first layer",
                                {'expected': stack.input_dim, 'found': rows.shape[1]})
    trained = stack.copy()
    logs: Dict[int, List[EpochLog]] = {}
    start = time.perf_counter()
    activity = rows
    # Distinct from the 'weights' substream used by build_stack
    layer_rng = rng.substream('pretrain')
    for index, cfg in enumerate(trained.per_layer_cd):
        logger.info(
            f"Pre-training layer {index + 1}/{len(trained.layers)} "
            f"({trained.layers[index].n_visible}->{trained.layers[index].n_hidden}, "
            f"lr={cfg.learning_rate:g}, momentum={cfg.momentum:g}) on {activity.shape[0]} rows"
        )
        sink = None
        if progress is not None:
            sink = (lambda done, layer=index: progress(layer, done))
        params, layer_logs = train_rbm(trained.layers[index], activity, cfg,
                                       layer_rng.substream(index), layer_index=index, progress=sink)
        if not all_finite(params.W, params.b, params.c):
            raise DivergenceError("Non-finite parameters after pre-training", {'layer': index})
        trained.layers[index] = params
        logs[index] = layer_logs
        if index + 1 < len(trained.layers):
            activity = hidden_conditional(params, activity)
    seconds = time.perf_counter() - start
    return PretrainResult(trained, logs, seconds, rows.shape[0])


def total_rows_processed(result: PretrainResult) -> Tuple[int, int]:
    """(first-layer rows per epoch, total rows seen across all layers and epochs)"""
    total = sum(log.rows for layer_logs in result.logs.values() for log in layer_logs)
    return result.first_layer_rows, total
