#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Dense linear algebra and seeded sampling

Matrices are float64 numpy arrays laid out as (batch_size x features).
Randomness comes from RngStream, a counter-based Philox generator that can
be split into independent purpose-keyed substreams.
"""

from __future__ import annotations

import zlib
from typing import Tuple, Union

import numpy as np
from scipy.special import expit

from core.errors import ConfigurationError, PreconditionError

Matrix2D = np.ndarray

# Fixed substream keys; other names are keyed by their CRC32
PURPOSES = {
    'weights': 0,
    'gibbs': 1,
    'shuffle': 2,
    'head': 3,
    'data': 4,
}


def _purpose_key(purpose: str) -> int:
    if purpose in PURPOSES:
        return PURPOSES[purpose]
    return zlib.crc32(purpose.encode('utf-8'))


class RngStream:
    """Reproducible random stream; identical seed and purpose path give identical draws"""

    def __init__(self, seed: int, path: Tuple[int, ...] = ()):
        if seed < 0 or seed >= 2 ** 64:
            raise ConfigurationError("Seed must be a 64-bit unsigned integer", {'seed': seed})
        self.seed = int(seed)
        self.path = tuple(path)
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        self._generator = np.random.Generator(np.random.Philox(sequence))

    def substream(self, purpose: Union[str, int]) -> "RngStream":
        """Derive an independent stream for one purpose (weights, gibbs, shuffle...)"""
        key = purpose if isinstance(purpose, int) else _purpose_key(purpose)
        return RngStream(self.seed, self.path + (key,))

    def uniform(self, shape) -> np.ndarray:
        return self._generator.random(shape)

    def normal(self, shape, scale: float = 1.0) -> np.ndarray:
        return self._generator.normal(0.0, scale, shape)

    def permutation(self, n: int) -> np.ndarray:
        return self._generator.permutation(n)

    def integers(self, low: int, high: int, size=None):
        return self._generator.integers(low, high, size=size)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, path={self.path})"


def as_matrix(x) -> Matrix2D:
    """Coerce to a 2-D float64 array (a vector becomes one row)"""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2:
        raise ConfigurationError("Expected a 2-D matrix", {'ndim': arr.ndim})
    return arr


def matmul(a: Matrix2D, b: Matrix2D) -> Matrix2D:
    """Matrix product with an explicit conformability check"""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ConfigurationError(
            "Dimension mismatch in matmul",
            {'left': a.shape, 'right': b.shape}
        )
    return a @ b


def logistic(x: Matrix2D) -> Matrix2D:
    """Elementwise 1 / (1 + exp(-x)), saturating without overflow"""
    return expit(np.asarray(x, dtype=np.float64))


def softplus(x: np.ndarray) -> np.ndarray:
    """log(1 + exp(x)) evaluated stably"""
    return np.logaddexp(0.0, np.asarray(x, dtype=np.float64))


def sample_bernoulli(probs: Matrix2D, rng: RngStream) -> Matrix2D:
    probs = np.asarray(probs, dtype=np.float64)
    if probs.size and (np.any(probs < 0.0) or np.any(probs > 1.0) or not np.all(np.isfinite(probs))):
        raise PreconditionError(
            "Bernoulli probabilities must lie in [0, 1]",
            {'min': float(np.nanmin(probs)), 'max': float(np.nanmax(probs))}
        )
    return (rng.uniform(probs.shape) < probs).astype(np.float64)


def sample_gaussian(means: Matrix2D, sigma, rng: RngStream) -> Matrix2D:
    means = np.asarray(means, dtype=np.float64)
    sigma_arr = np.asarray(sigma, dtype=np.float64)
    if np.any(sigma_arr <= 0.0) or not np.all(np.isfinite(sigma_arr)):
        raise PreconditionError("Gaussian sigma must be strictly positive", {'sigma': sigma})
    return means + sigma_arr * rng.normal(means.shape)


def all_finite(*arrays: np.ndarray) -> bool:
    return all(bool(np.all(np.isfinite(a))) for a in arrays)
