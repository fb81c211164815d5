#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Classification head and discriminative fine-tuning

The full network is the DBN's mean-field upward pass followed by a
logistic hidden layer and a softmax output. Fine-tuning backpropagates
the cross-entropy through every layer, leaves frozen DBN layers
untouched and updates the rest with Adam, using a small learning rate for
the DBN and the regular one for the head.

The head starts either from random weights or from a fit to the training
rows (fit_head_init), which matters when the top DBN layer is narrow:
freshly pre-trained features can sit within a few hundredths of 0.5.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import solve
from scipy.special import softmax as scipy_softmax

from config.settings import (
    ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON, BATCH_SIZE, FINETUNE_EPOCHS, FLAT_FEATURE_RATIO,
    FROZEN_LAYERS, HEAD_LR, LDA_SHRINKAGE, STRICT_HEAD_DIMS, UNFROZEN_DBN_LR,
)
from core.dbn import DbnStack, propagate_up
from core.errors import ConfigurationError, DataError, DivergenceError, PreconditionError
from core.fusion import ZERO_STD
from core.numerics import RngStream, as_matrix, logistic
from core.pipeline import BatchPlan, batch_indices
from utils.logger import get_logger

logger = get_logger()

LOG_FLOOR = 1e-12


class Activation(str, Enum):
    LOGISTIC = 'logistic'
    SOFTMAX = 'softmax'

    @property
    def tag(self) -> int:
        return 0 if self is Activation.LOGISTIC else 1

    @classmethod
    def from_tag(cls, tag: int) -> "Activation":
        if tag == 0:
            return cls.LOGISTIC
        if tag == 1:
            return cls.SOFTMAX
        raise DataError("Unknown activation tag", context={'tag': tag})


@dataclass
class DenseLayer:
    weights: np.ndarray
    bias: np.ndarray
    activation: Activation

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64).reshape(-1)
        self.activation = Activation(self.activation)
        if self.weights.ndim != 2 or self.bias.size != self.weights.shape[1]:
            raise ConfigurationError("Bias length must equal layer output size",
                                     {'weights': self.weights.shape, 'bias': self.bias.size})

    @property
    def n_in(self) -> int:
        return self.weights.shape[0]

    @property
    def n_out(self) -> int:
        return self.weights.shape[1]

    def copy(self) -> "DenseLayer":
        return DenseLayer(self.weights.copy(), self.bias.copy(), self.activation)


@dataclass
class FinetuneConfig:
    head_lr: float = HEAD_LR
    unfrozen_dbn_lr: float = UNFROZEN_DBN_LR
    frozen_layers: FrozenSet[int] = frozenset(FROZEN_LAYERS)
    epochs: int = FINETUNE_EPOCHS
    batch_size: int = BATCH_SIZE

    def __post_init__(self):
        self.frozen_layers = frozenset(int(i) for i in self.frozen_layers)
        if self.head_lr < 0 or self.unfrozen_dbn_lr < 0:
            raise ConfigurationError("Learning rates must be non-negative",
                                     {'head_lr': self.head_lr, 'unfrozen_dbn_lr': self.unfrozen_dbn_lr})
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigurationError("Epochs and batch size must be positive",
                                     {'epochs': self.epochs, 'batch_size': self.batch_size})


@dataclass
class AdamState:
    """Bias-corrected Adam moments, one pair per named parameter"""

    names: List[str]
    m: List[np.ndarray]
    v: List[np.ndarray]
    t: int = 0
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPSILON

    @classmethod
    def zeros_like(cls, names: Sequence[str], params: Sequence[np.ndarray]) -> "AdamState":
        return cls(list(names), [np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params])

    def copy(self) -> "AdamState":
        return AdamState(list(self.names), [a.copy() for a in self.m], [a.copy() for a in self.v],
                         self.t, self.beta1, self.beta2, self.eps)


@dataclass
class FinetuneEpochLog:
    epoch: int
    loss: float
    accuracy: float
    seconds: float


@dataclass
class FinetuneResult:
    stack: DbnStack
    head: List[DenseLayer]
    adam: AdamState
    epochs: List[FinetuneEpochLog] = field(default_factory=list)
    batch_losses: List[float] = field(default_factory=list)
    seconds: float = 0.0


def build_head(top_dim: int, n_classes: int, rng: Optional[RngStream] = None,
               strict: bool = False) -> List[DenseLayer]:
    """top_dim -> top_dim/2 (logistic) -> n_classes (softmax)"""
    if n_classes < 2:
        raise ConfigurationError("Softmax head needs at least two classes", {'n_classes': n_classes})
    if top_dim < 2:
        raise ConfigurationError("Top dimension must be at least 2", {'top_dim': top_dim})
    if strict and top_dim not in STRICT_HEAD_DIMS:
        raise ConfigurationError("Unsupported head width in strict mode",
                                 {'top_dim': top_dim, 'allowed': STRICT_HEAD_DIMS})
    rng = (rng or RngStream(0)).substream('head')
    hidden = top_dim // 2
    layers = []
    for index, (n_in, n_out, activation) in enumerate(
            [(top_dim, hidden, Activation.LOGISTIC), (hidden, n_classes, Activation.SOFTMAX)]):
        weights = rng.substream(index).normal((n_in, n_out)) / np.sqrt(n_in)
        layers.append(DenseLayer(weights, np.zeros(n_out), activation))
    return layers


def fit_head_init(stack: DbnStack, head: Sequence[DenseLayer], rows, labels,
                  shrinkage: float = LDA_SHRINKAGE) -> List[DenseLayer]:
    """
    Data-dependent starting point for a two-layer head

    The first layer keeps its random directions but is rescaled to read
    standardized top-layer features, so it sees unit spread however
    narrow the DBN's output is. The softmax layer starts as a linear
    discriminant over the first layer's outputs: class means, a pooled
    covariance shrunk toward a scaled identity, and log class priors.
    A class absent from the rows scores the mean of the other classes'
    logits plus log LOG_FLOOR, so it is never predicted on its own.

    Raises:
        ConfigurationError: head is not logistic -> softmax, or bad shrinkage
        PreconditionError: fewer than two rows, or labels out of range
    """
    _check_head(stack, head)
    if len(head) != 2 or head[0].activation is not Activation.LOGISTIC:
        raise ConfigurationError("Fitted initialization needs a logistic -> softmax head",
                                 {'layers': len(head)})
    if not 0.0 < shrinkage <= 1.0:
        raise ConfigurationError("Shrinkage must lie in (0, 1]", {'shrinkage': shrinkage})
    rows = as_matrix(rows)
    n_classes = head[-1].n_out
    labels = _check_labels(labels, rows.shape[0], n_classes)
    if rows.shape[0] < 2:
        raise PreconditionError("Fitted initialization needs at least two rows", {'rows': rows.shape[0]})

    features = propagate_up(stack, rows)
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    usable = std > max(ZERO_STD, FLAT_FEATURE_RATIO * float(std.max()))
    scale = np.zeros_like(std)
    scale[usable] = 1.0 / std[usable]
    first = head[0].copy()
    first.weights = first.weights * scale[:, np.newaxis]
    first.bias = first.bias - mean @ first.weights

    hidden = logistic(features @ first.weights + first.bias)
    n_rows, width = hidden.shape
    counts = np.bincount(labels, minlength=n_classes)
    present = counts > 0
    means = np.zeros((n_classes, width))
    np.add.at(means, labels, hidden)
    means[present] /= counts[present, np.newaxis]
    center = hidden.mean(axis=0)
    residual = hidden - means[labels]
    within = residual.T @ residual / n_rows
    spread = max(float(np.mean(np.var(hidden, axis=0))), LOG_FLOOR)
    covariance = (1.0 - shrinkage) * within + shrinkage * spread * np.eye(width)

    templates = solve(covariance, (means[present] - center).T, assume_a='pos')
    last = head[1].copy()
    last.weights[:, present] = templates
    midpoints = (means[present] + center) / 2.0
    last.bias[present] = (-np.einsum('dc,cd->c', templates, midpoints)
                          + np.log(counts[present] / n_rows))
    if not np.all(present):
        # Mean of the seen logits plus log LOG_FLOOR: probability at most LOG_FLOOR
        last.weights[:, ~present] = templates.mean(axis=1, keepdims=True)
        last.bias[~present] = float(last.bias[present].mean()) + np.log(LOG_FLOOR)

    logger.info(
        f"Fitted head initialization: {int(usable.sum())}/{usable.size} top features used, "
        f"{int(present.sum())}/{n_classes} classes seen, shrinkage {shrinkage:g}"
    )
    return [first, last]


def softmax(logits) -> np.ndarray:
    return scipy_softmax(as_matrix(logits), axis=1)


def _check_head(stack: DbnStack, head: Sequence[DenseLayer]) -> None:
    if not head:
        raise ConfigurationError("Empty classification head")
    if head[0].n_in != stack.top_dim:
        raise ConfigurationError("Head input does not match DBN top layer",
                                 {'head': head[0].n_in, 'dbn': stack.top_dim})
    for lower, upper in zip(head[:-1], head[1:]):
        if lower.n_out != upper.n_in:
            raise ConfigurationError("Head layers do not chain", {'out': lower.n_out, 'in': upper.n_in})
    if head[-1].activation is not Activation.SOFTMAX:
        raise ConfigurationError("Last head layer must be softmax")


def _forward_all(stack: DbnStack, head: Sequence[DenseLayer], rows) -> List[np.ndarray]:
    """Activations at every layer boundary, input first, probabilities last"""
    rows = as_matrix(rows)
    if rows.shape[1] != stack.input_dim:
        raise PreconditionError("Rows do not match the first layer",
                                {'expected': stack.input_dim, 'found': rows.shape[1]})
    _check_head(stack, head)
    activations = [rows]
    current = rows
    for layer in stack.layers:
        scaled = current / layer.sigma if layer.is_gaussian else current
        current = logistic(scaled @ layer.W + layer.c)
        activations.append(current)
    for layer in head:
        pre = current @ layer.weights + layer.bias
        current = softmax(pre) if layer.activation is Activation.SOFTMAX else logistic(pre)
        activations.append(current)
    return activations


def forward(stack: DbnStack, head: Sequence[DenseLayer], rows) -> np.ndarray:
    """Class probabilities for every row"""
    return _forward_all(stack, head, rows)[-1]


def _check_labels(labels, n_rows: int, n_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if labels.size != n_rows:
        raise PreconditionError("One label per row is required", {'rows': n_rows, 'labels': labels.size})
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise PreconditionError("Label outside [0, n_classes)",
                                {'min': int(labels.min()), 'max': int(labels.max()), 'n_classes': n_classes})
    return labels


def cross_entropy(probs, labels) -> float:
    """Mean of -log p[label], with the probability floored at 1e-12"""
    probs = as_matrix(probs)
    labels = _check_labels(labels, probs.shape[0], probs.shape[1])
    picked = probs[np.arange(probs.shape[0]), labels]
    return float(np.mean(-np.log(np.maximum(picked, LOG_FLOOR))))


def parameter_slots(stack: DbnStack, head: Sequence[DenseLayer],
                    dbn_layers: Sequence[int]) -> List[Tuple[str, np.ndarray]]:
    """Ordered (name, array) pairs of the parameters that fine-tuning may touch"""
    slots = []
    for index in sorted(dbn_layers):
        slots.append((f"dbn.{index}.W", stack.layers[index].W))
        slots.append((f"dbn.{index}.c", stack.layers[index].c))
    for index, layer in enumerate(head):
        slots.append((f"head.{index}.weights", layer.weights))
        slots.append((f"head.{index}.bias", layer.bias))
    return slots


def backprop(stack: DbnStack, head: Sequence[DenseLayer], rows, labels,
             dbn_layers: Sequence[int] = ()) -> Tuple[float, Dict[str, np.ndarray]]:
    """
    Cross-entropy loss and its exact gradients

    Gradients are returned for every head parameter and for W and c of the
    DBN layers listed in dbn_layers.
    """
    activations = _forward_all(stack, head, rows)
    probs = activations[-1]
    labels = _check_labels(labels, probs.shape[0], probs.shape[1])
    batch = probs.shape[0]
    loss = cross_entropy(probs, labels)

    onehot = np.zeros_like(probs)
    onehot[np.arange(batch), labels] = 1.0
    delta = (probs - onehot) / batch

    grads: Dict[str, np.ndarray] = {}
    n_dbn = len(stack.layers)
    lowest = min(dbn_layers) if len(dbn_layers) else n_dbn

    for index in range(len(head) - 1, -1, -1):
        layer = head[index]
        inputs = activations[n_dbn + index]
        grads[f"head.{index}.weights"] = inputs.T @ delta
        grads[f"head.{index}.bias"] = delta.sum(axis=0)
        if index == 0 and lowest >= n_dbn:
            break
        delta = (delta @ layer.weights.T) * inputs * (1.0 - inputs)

    if lowest < n_dbn:
        wanted = set(dbn_layers)
        for index in range(n_dbn - 1, lowest - 1, -1):
            layer = stack.layers[index]
            inputs = activations[index]
            scaled = inputs / layer.sigma if layer.is_gaussian else inputs
            if index in wanted:
                grads[f"dbn.{index}.W"] = scaled.T @ delta
                grads[f"dbn.{index}.c"] = delta.sum(axis=0)
            if index > lowest:
                delta = (delta @ layer.W.T) * inputs * (1.0 - inputs)
    return loss, grads


def adam_step(params: Sequence[np.ndarray], grads: Sequence[np.ndarray], state: AdamState,
              lr, context: Optional[dict] = None) -> Tuple[List[np.ndarray], AdamState]:
    """
    One bias-corrected Adam step

    Args:
        lr: one learning rate, or one per parameter
    """
    if len(params) != len(grads) or len(params) != len(state.m):
        raise PreconditionError("Parameters, gradients and moments must align",
                                {'params': len(params), 'grads': len(grads), 'moments': len(state.m)})
    lrs = list(lr) if isinstance(lr, (list, tuple)) else [lr] * len(params)
    for name, grad in zip(state.names, grads):
        if not np.all(np.isfinite(grad)):
            details = dict(context or {})
            details['parameter'] = name
            raise DivergenceError("Non-finite gradient", details)

    t = state.t + 1
    correction1 = 1.0 - state.beta1 ** t
    correction2 = 1.0 - state.beta2 ** t
    new_params, new_m, new_v = [], [], []
    for param, grad, m, v, rate in zip(params, grads, state.m, state.v, lrs):
        if param.shape != grad.shape or param.shape != m.shape:
            raise PreconditionError("Gradient shape does not match parameter",
                                    {'param': param.shape, 'grad': grad.shape})
        m = state.beta1 * m + (1.0 - state.beta1) * grad
        v = state.beta2 * v + (1.0 - state.beta2) * grad * grad
        m_hat = m / correction1
        v_hat = v / correction2
        new_params.append(param - rate * m_hat / (np.sqrt(v_hat) + state.eps))
        new_m.append(m)
        new_v.append(v)
    return new_params, AdamState(list(state.names), new_m, new_v, t, state.beta1, state.beta2, state.eps)


def trainable_dbn_layers(stack: DbnStack, cfg: FinetuneConfig) -> List[int]:
    if cfg.unfrozen_dbn_lr == 0.0:
        return []
    return [i for i in range(len(stack.layers)) if i not in cfg.frozen_layers]


def _assign(stack: DbnStack, head: List[DenseLayer], names: Sequence[str],
            values: Sequence[np.ndarray]) -> None:
    for name, value in zip(names, values):
        kind, index, attr = name.split('.')
        target = stack.layers[int(index)] if kind == 'dbn' else head[int(index)]
        setattr(target, attr, value)


def finetune(stack: DbnStack, head: Sequence[DenseLayer], cfg: FinetuneConfig, rows, labels,
             rng: RngStream, progress=None) -> FinetuneResult:
    """Supervised training of head and unfrozen DBN layers"""
    rows = as_matrix(rows)
    labels = _check_labels(labels, rows.shape[0], head[-1].n_out)
    for index in cfg.frozen_layers:
        if not 0 <= index < len(stack.layers):
            raise ConfigurationError("Frozen layer index out of range", {'layer': index})
    stack = stack.copy()
    head = [layer.copy() for layer in head]
    dbn_layers = trainable_dbn_layers(stack, cfg)

    slots = parameter_slots(stack, head, dbn_layers)
    names = [name for name, _ in slots]
    lrs = [cfg.unfrozen_dbn_lr if name.startswith('dbn.') else cfg.head_lr for name in names]
    state = AdamState.zeros_like(names, [array for _, array in slots])
    shuffle_rng = rng.substream('shuffle')

    logger.info(
        f"Fine-tuning {len(head)} head layers and DBN layers {dbn_layers or 'none'} "
        f"(frozen {sorted(cfg.frozen_layers)}) for {cfg.epochs} epochs"
    )
    result = FinetuneResult(stack, head, state)
    start_all = time.perf_counter()
    for epoch in range(cfg.epochs):
        start = time.perf_counter()
        plan = BatchPlan(batch_size=cfg.batch_size, shuffle_seed=int(shuffle_rng.integers(0, 2 ** 63)))
        total_loss, correct = 0.0, 0
        for batch_index, index in enumerate(batch_indices(rows.shape[0], plan)):
            batch_rows, batch_labels = rows[index], labels[index]
            loss, grads = backprop(stack, head, batch_rows, batch_labels, dbn_layers)
            if not np.isfinite(loss):
                raise DivergenceError("Fine-tuning loss is not finite",
                                      {'epoch': epoch + 1, 'batch': batch_index})
            current = [array for _, array in parameter_slots(stack, head, dbn_layers)]
            updated, state = adam_step(current, [grads[name] for name in names], state, lrs,
                                       {'epoch': epoch + 1, 'batch': batch_index})
            _assign(stack, head, names, updated)
            result.batch_losses.append(loss)
            total_loss += loss * len(index)
            if progress is not None:
                progress(len(index))
        probs = forward(stack, head, rows)
        correct = int(np.sum(np.argmax(probs, axis=1) == labels))
        epoch_log = FinetuneEpochLog(epoch + 1, total_loss / rows.shape[0],
                                     correct / rows.shape[0], time.perf_counter() - start)
        result.epochs.append(epoch_log)
        logger.info(
            f"Fine-tune epoch {epoch + 1}/{cfg.epochs}: loss {epoch_log.loss:.4f}, "
            f"train accuracy {epoch_log.accuracy:.4f} ({epoch_log.seconds:.2f}s)"
        )
    result.stack, result.head, result.adam = stack, head, state
    result.seconds = time.perf_counter() - start_all
    return result


def vote_clips(probs, clip_index, n_clips: Optional[int] = None) -> np.ndarray:
    """Mean probability per clip, then argmax (lowest index wins ties)"""
    probs = as_matrix(probs)
    clip_index = np.asarray(clip_index, dtype=np.int64).reshape(-1)
    if clip_index.size != probs.shape[0]:
        raise PreconditionError("One clip index per row is required")
    n_clips = int(clip_index.max()) + 1 if n_clips is None else n_clips
    counts = np.bincount(clip_index, minlength=n_clips)
    if np.any(counts == 0):
        missing = int(np.flatnonzero(counts == 0)[0])
        raise PreconditionError("Clip has no rows", {'clip': missing})
    sums = np.zeros((n_clips, probs.shape[1]))
    np.add.at(sums, clip_index, probs)
    means = sums / counts[:, np.newaxis]
    return np.argmax(means, axis=1)


def predict_clip(stack: DbnStack, head: Sequence[DenseLayer], rows, clip_index,
                 n_clips: Optional[int] = None) -> np.ndarray:
    return vote_clips(forward(stack, head, rows), clip_index, n_clips)
