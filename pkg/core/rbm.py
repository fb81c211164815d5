#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Restricted Boltzmann machine with Bernoulli or Gaussian visible units

Energy conventions:
    bernoulli  E(v,h) = -b.v - c.h - v W h
    gaussian   E(v,h) = sum (v-b)^2 / 2 sigma^2 - c.h - (v/sigma) W h

Gradients returned by cd_gradient point uphill on the log-likelihood, so
updates add them (descending the negative log-likelihood).
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Tuple

import numpy as np

from config.settings import BATCH_SIZE, CD_STEPS, PRETRAIN_EPOCHS, WEIGHT_INIT_STD
from core.errors import ConfigurationError, DataError, DivergenceError, PreconditionError
from core.numerics import (
    RngStream, all_finite, as_matrix, logistic, matmul, sample_bernoulli,
    sample_gaussian, softplus,
)
from core.pipeline import BatchPlan, batch_indices
from utils.logger import get_logger

logger = get_logger()


class VisibleKind(str, Enum):
    BERNOULLI = 'bernoulli'
    GAUSSIAN = 'gaussian'

    @property
    def tag(self) -> int:
        return 0 if self is VisibleKind.BERNOULLI else 1

    @classmethod
    def from_tag(cls, tag: int) -> "VisibleKind":
        if tag == 0:
            return cls.BERNOULLI
        if tag == 1:
            return cls.GAUSSIAN
        raise DataError("Unknown visible kind tag", context={'tag': tag})


@dataclass
class RbmParams:
    """Weights W (m x n), visible bias b (m), hidden bias c (n)"""

    W: np.ndarray
    b: np.ndarray
    c: np.ndarray
    visible_kind: VisibleKind = VisibleKind.BERNOULLI
    sigma: Optional[np.ndarray] = None

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64).reshape(-1)
        self.c = np.asarray(self.c, dtype=np.float64).reshape(-1)
        self.visible_kind = VisibleKind(self.visible_kind)
        if self.W.ndim != 2:
            raise ConfigurationError("Weight matrix must be 2-D", {'shape': self.W.shape})
        m, n = self.W.shape
        if self.b.size != m or self.c.size != n:
            raise ConfigurationError(
                "Bias lengths do not match weight matrix",
                {'W': self.W.shape, 'b': self.b.size, 'c': self.c.size}
            )
        if self.visible_kind is VisibleKind.GAUSSIAN:
            if self.sigma is None:
                self.sigma = np.ones(m)
            self.sigma = np.asarray(self.sigma, dtype=np.float64).reshape(-1)
            if self.sigma.size != m:
                raise ConfigurationError("Sigma length must equal visible size",
                                         {'sigma': self.sigma.size, 'm': m})
            if np.any(self.sigma <= 0.0):
                raise PreconditionError("Gaussian sigma must be strictly positive")
        else:
            self.sigma = None

    @property
    def n_visible(self) -> int:
        return self.W.shape[0]

    @property
    def n_hidden(self) -> int:
        return self.W.shape[1]

    @property
    def is_gaussian(self) -> bool:
        return self.visible_kind is VisibleKind.GAUSSIAN

    def copy(self) -> "RbmParams":
        return RbmParams(
            self.W.copy(), self.b.copy(), self.c.copy(), self.visible_kind,
            None if self.sigma is None else self.sigma.copy()
        )

    def fingerprint(self) -> str:
        """SHA-256 over every parameter byte"""
        digest = hashlib.sha256()
        for array in (self.W, self.b, self.c):
            digest.update(np.ascontiguousarray(array, dtype='<f8').tobytes())
        if self.sigma is not None:
            digest.update(np.ascontiguousarray(self.sigma, dtype='<f8').tobytes())
        digest.update(self.visible_kind.value.encode('ascii'))
        return digest.hexdigest()


@dataclass
class CdConfig:
    k: int = CD_STEPS
    learning_rate: float = 1e-3
    momentum: float = 0.5
    batch_size: int = BATCH_SIZE
    epochs: int = PRETRAIN_EPOCHS
    # Probabilities everywhere instead of samples
    mean_field: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ConfigurationError("CD needs at least one Gibbs step", {'k': self.k})
        if self.learning_rate < 0:
            raise ConfigurationError("Learning rate must be non-negative",
                                     {'learning_rate': self.learning_rate})
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigurationError("Momentum must lie in [0, 1)", {'momentum': self.momentum})
        if self.batch_size < 1 or self.epochs < 1:
            raise ConfigurationError("Batch size and epochs must be positive",
                                     {'batch_size': self.batch_size, 'epochs': self.epochs})


@dataclass
class MomentumState:
    dW: np.ndarray
    db: np.ndarray
    dc: np.ndarray

    @classmethod
    def zeros_like(cls, params: RbmParams) -> "MomentumState":
        return cls(np.zeros_like(params.W), np.zeros_like(params.b), np.zeros_like(params.c))

    def copy(self) -> "MomentumState":
        return MomentumState(self.dW.copy(), self.db.copy(), self.dc.copy())


@dataclass
class RbmGradient:
    """Log-likelihood ascent direction, shaped like the parameters"""

    dW: np.ndarray
    db: np.ndarray
    dc: np.ndarray

    def max_abs(self) -> float:
        return float(max(np.max(np.abs(self.dW), initial=0.0),
                         np.max(np.abs(self.db), initial=0.0),
                         np.max(np.abs(self.dc), initial=0.0)))


@dataclass
class CdStats:
    reconstruction_error: float
    max_abs_grad: float


@dataclass
class EpochLog:
    layer: int
    epoch: int
    reconstruction_error: float
    seconds: float
    rows: int
    batches: int
    extra: dict = field(default_factory=dict)


def init_params(n_visible: int, n_hidden: int, visible_kind: VisibleKind,
                rng: RngStream, std: float = WEIGHT_INIT_STD) -> RbmParams:
    if n_visible < 1 or n_hidden < 1:
        raise ConfigurationError("Layer sizes must be positive",
                                 {'n_visible': n_visible, 'n_hidden': n_hidden})
    W = rng.normal((n_visible, n_hidden), scale=std)
    return RbmParams(W, np.zeros(n_visible), np.zeros(n_hidden), VisibleKind(visible_kind))


def _scaled(params: RbmParams, v: np.ndarray) -> np.ndarray:
    """Visible activity as seen by the weights (v / sigma for gaussian units)"""
    if params.is_gaussian:
        return v / params.sigma
    return v


def _check_cols(batch: np.ndarray, expected: int, what: str) -> None:
    if batch.shape[1] != expected:
        raise PreconditionError(
            f"{what} has the wrong number of columns",
            {'expected': expected, 'found': batch.shape[1]}
        )


def energy(params: RbmParams, v, h) -> float:
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    h = np.asarray(h, dtype=np.float64).reshape(-1)
    if v.size != params.n_visible or h.size != params.n_hidden:
        raise PreconditionError("State vectors do not match model size",
                                {'v': v.size, 'h': h.size, 'W': params.W.shape})
    if np.any((h != 0.0) & (h != 1.0)):
        raise PreconditionError("Hidden state must be binary")
    interaction = float(_scaled(params, v) @ params.W @ h)
    if params.is_gaussian:
        visible_term = float(np.sum((v - params.b) ** 2 / (2.0 * params.sigma ** 2)))
    else:
        visible_term = -float(params.b @ v)
    return visible_term - float(params.c @ h) - interaction


def hidden_conditional(params: RbmParams, v_batch) -> np.ndarray:
    """P(h_j = 1 | v) for every row"""
    v_batch = as_matrix(v_batch)
    _check_cols(v_batch, params.n_visible, "Visible batch")
    return logistic(matmul(_scaled(params, v_batch), params.W) + params.c)


def visible_conditional(params: RbmParams, h_batch) -> np.ndarray:
    """P(v_i = 1 | h) for bernoulli units, the Normal mean for gaussian units"""
    h_batch = as_matrix(h_batch)
    _check_cols(h_batch, params.n_hidden, "Hidden batch")
    pre = matmul(h_batch, params.W.T) + params.b
    if params.is_gaussian:
        return pre
    return logistic(pre)


def sample_visible(params: RbmParams, h_batch, rng: RngStream) -> np.ndarray:
    mean = visible_conditional(params, h_batch)
    if params.is_gaussian:
        return sample_gaussian(mean, params.sigma, rng)
    return sample_bernoulli(mean, rng)


def free_energy(params: RbmParams, v):
    """Free energy of one vector (float) or of every row of a matrix (array)"""
    single = np.asarray(v).ndim == 1
    v_batch = as_matrix(v)
    _check_cols(v_batch, params.n_visible, "Visible batch")
    hidden_term = softplus(matmul(_scaled(params, v_batch), params.W) + params.c).sum(axis=1)
    if params.is_gaussian:
        visible_term = np.sum((v_batch - params.b) ** 2 / (2.0 * params.sigma ** 2), axis=1)
    else:
        visible_term = -(v_batch @ params.b)
    result = visible_term - hidden_term
    return float(result[0]) if single else result


def cd_gradient(params: RbmParams, batch, k: int, rng: RngStream,
                mean_field: bool = False) -> Tuple[RbmGradient, float]:
    """
    CD-k estimate of the log-likelihood gradient

    Positive statistics use P(h|v) on the data. The chain samples hidden
    states between steps; bernoulli visibles are sampled, gaussian visibles
    follow the conditional mean. The final statistics use P(h|v_k).

    Returns:
        Tuple of (gradient, one-step reconstruction error)
    """
    v0 = as_matrix(batch)
    _check_cols(v0, params.n_visible, "Training batch")
    rows = v0.shape[0]
    if rows == 0:
        raise PreconditionError("Empty training batch")

    ph0 = hidden_conditional(params, v0)
    h = ph0 if mean_field else sample_bernoulli(ph0, rng)

    recon_error = None
    vk = v0
    phk = ph0
    for step in range(k):
        mean = visible_conditional(params, h)
        if step == 0:
            recon_error = float(np.mean((v0 - mean) ** 2))
        if params.is_gaussian or mean_field:
            vk = mean
        else:
            vk = sample_bernoulli(mean, rng)
        phk = hidden_conditional(params, vk)
        if step < k - 1:
            h = phk if mean_field else sample_bernoulli(phk, rng)

    s0 = _scaled(params, v0)
    sk = _scaled(params, vk)
    dW = (s0.T @ ph0 - sk.T @ phk) / rows
    if params.is_gaussian:
        db = np.mean((v0 - vk) / params.sigma ** 2, axis=0)
    else:
        db = np.mean(v0 - vk, axis=0)
    dc = np.mean(ph0 - phk, axis=0)
    return RbmGradient(dW, db, dc), recon_error


def cd_update(params: RbmParams, batch, cfg: CdConfig, state: MomentumState,
              rng: RngStream, context: Optional[dict] = None
              ) -> Tuple[RbmParams, MomentumState, CdStats]:
    """One momentum CD-k step; returns new parameters and velocities"""
    batch = as_matrix(batch)
    if batch.shape[0] > cfg.batch_size:
        raise PreconditionError("Batch larger than configured batch size",
                                {'rows': batch.shape[0], 'batch_size': cfg.batch_size})
    grad, recon_error = cd_gradient(params, batch, cfg.k, rng, cfg.mean_field)
    max_grad = grad.max_abs()

    new_state = MomentumState(
        cfg.momentum * state.dW + cfg.learning_rate * grad.dW,
        cfg.momentum * state.db + cfg.learning_rate * grad.db,
        cfg.momentum * state.dc + cfg.learning_rate * grad.dc,
    )
    new_params = RbmParams(
        params.W + new_state.dW,
        params.b + new_state.db,
        params.c + new_state.dc,
        params.visible_kind,
        None if params.sigma is None else params.sigma.copy(),
    )
    if not all_finite(new_params.W, new_params.b, new_params.c) or not np.isfinite(max_grad):
        details = dict(context or {})
        details['max_abs_grad'] = max_grad
        raise DivergenceError("Non-finite RBM update", details)
    return new_params, new_state, CdStats(recon_error, max_grad)


def reconstruction_error(params: RbmParams, batch, rng: RngStream) -> float:
    """Mean squared error against a one-step Gibbs reconstruction"""
    v0 = as_matrix(batch)
    h = sample_bernoulli(hidden_conditional(params, v0), rng)
    return float(np.mean((v0 - visible_conditional(params, h)) ** 2))


def gibbs_chain(params: RbmParams, v0, sweeps: int, rng: RngStream,
                record: bool = False) -> np.ndarray:
    """
    Block Gibbs sweeps (h|v then v|h) from v0, one chain per row

    Returns the final visible states, or every visited state stacked as
    (sweeps, chains, m) when record is set.
    """
    v = as_matrix(v0).copy()
    _check_cols(v, params.n_visible, "Initial state")
    history = np.empty((sweeps,) + v.shape) if record else None
    for sweep in range(sweeps):
        h = sample_bernoulli(hidden_conditional(params, v), rng)
        v = sample_visible(params, h, rng)
        if record:
            history[sweep] = v
    return history if record else v


def train_rbm(params: RbmParams, rows, cfg: CdConfig, rng: RngStream,
              layer_index: int = 0,
              progress: Optional[Callable[[int], None]] = None
              ) -> Tuple[RbmParams, List[EpochLog]]:
    """Run cfg.epochs epochs of seeded mini-batch CD over rows"""
    rows = as_matrix(rows)
    _check_cols(rows, params.n_visible, "Training rows")
    gibbs_rng = rng.substream('gibbs')
    shuffle_rng = rng.substream('shuffle')
    state = MomentumState.zeros_like(params)
    logs: List[EpochLog] = []

    for epoch in range(cfg.epochs):
        start = time.perf_counter()
        plan = BatchPlan(batch_size=cfg.batch_size, shuffle_seed=int(shuffle_rng.integers(0, 2 ** 63)))
        batches = batch_indices(rows.shape[0], plan)
        total_error = 0.0
        for batch_index, index in enumerate(batches):
            context = {'layer': layer_index, 'epoch': epoch + 1, 'batch': batch_index}
            params, state, stats = cd_update(params, rows[index], cfg, state, gibbs_rng, context)
            total_error += stats.reconstruction_error * len(index)
            logger.debug(
                f"layer {layer_index} epoch {epoch + 1} batch {batch_index}: "
                f"recon={stats.reconstruction_error:.6f} max|grad|={stats.max_abs_grad:.3e}"
            )
            if progress is not None:
                progress(len(index))
        seconds = time.perf_counter() - start
        log = EpochLog(layer_index, epoch + 1, total_error / rows.shape[0], seconds,
                       rows.shape[0], len(batches))
        logs.append(log)
        logger.info(
            f"Layer {layer_index + 1} epoch {epoch + 1}/{cfg.epochs}: "
            f"reconstruction error {log.reconstruction_error:.6f} ({seconds:.2f}s)"
        )
    return params, logs
