#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Brute-force reference computations for tiny Bernoulli RBMs

Everything here enumerates visible (and sometimes hidden) states, so it is
only usable when m + n stays under TinyModelLimit.max_units. Sums run in
log space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from config.settings import ORACLE_MAX_UNITS
from core.errors import ConfigurationError, PreconditionError
from core.numerics import as_matrix, logistic
from core.rbm import RbmGradient, RbmParams, energy, free_energy


@dataclass(frozen=True)
class TinyModelLimit:
    max_units: int = ORACLE_MAX_UNITS


DEFAULT_LIMIT = TinyModelLimit()


def _check(params: RbmParams, limit: TinyModelLimit) -> None:
    if params.is_gaussian:
        raise ConfigurationError("Exact enumeration needs bernoulli visible units")
    units = params.n_visible + params.n_hidden
    if units > limit.max_units:
        raise ConfigurationError("Model too large for exact enumeration",
                                 {'units': units, 'limit': limit.max_units})


def gray_code_states(n: int) -> np.ndarray:
    """All 2^n binary vectors, consecutive rows differing in one bit"""
    codes = np.arange(2 ** n, dtype=np.int64)
    gray = codes ^ (codes >> 1)
    bits = (gray[:, np.newaxis] >> np.arange(n, dtype=np.int64)) & 1
    return bits.astype(np.float64)


def exact_log_partition(params: RbmParams, limit: TinyModelLimit = DEFAULT_LIMIT) -> float:
    _check(params, limit)
    states = gray_code_states(params.n_visible)
    return float(logsumexp(-free_energy(params, states)))


def exact_partition(params: RbmParams, limit: TinyModelLimit = DEFAULT_LIMIT) -> float:
    """Z summed over visible states with hidden units marginalized"""
    return float(np.exp(exact_log_partition(params, limit)))


def joint_log_partition(params: RbmParams, limit: TinyModelLimit = DEFAULT_LIMIT) -> float:
    """log Z by enumerating every (v, h) pair of the energy function"""
    _check(params, limit)
    visible = gray_code_states(params.n_visible)
    hidden = gray_code_states(params.n_hidden)
    negative_energies = [-energy(params, v, h) for v in visible for h in hidden]
    return float(logsumexp(negative_energies))


def exact_marginal(params: RbmParams, v, limit: TinyModelLimit = DEFAULT_LIMIT) -> float:
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.size != params.n_visible:
        raise PreconditionError("Visible vector does not match model", {'v': v.size, 'm': params.n_visible})
    log_z = exact_log_partition(params, limit)
    return float(np.exp(-free_energy(params, v) - log_z))


def exact_marginals(params: RbmParams, limit: TinyModelLimit = DEFAULT_LIMIT):
    """(states, probabilities) over all visible configurations"""
    _check(params, limit)
    states = gray_code_states(params.n_visible)
    log_p = -free_energy(params, states)
    log_p -= logsumexp(log_p)
    return states, np.exp(log_p)


def exact_hidden_posterior(params: RbmParams, v, limit: TinyModelLimit = DEFAULT_LIMIT) -> np.ndarray:
    """P(h_j = 1 | v) as a ratio of enumerated Boltzmann weights"""
    _check(params, limit)
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    hidden = gray_code_states(params.n_hidden)
    log_w = np.array([-energy(params, v, h) for h in hidden])
    weights = np.exp(log_w - logsumexp(log_w))
    return weights @ hidden


def exact_visible_posterior(params: RbmParams, h, limit: TinyModelLimit = DEFAULT_LIMIT) -> np.ndarray:
    """P(v_i = 1 | h) by enumerating visible states"""
    _check(params, limit)
    h = np.asarray(h, dtype=np.float64).reshape(-1)
    visible = gray_code_states(params.n_visible)
    log_w = np.array([-energy(params, v, h) for v in visible])
    weights = np.exp(log_w - logsumexp(log_w))
    return weights @ visible


def exact_nll(params: RbmParams, data, limit: TinyModelLimit = DEFAULT_LIMIT) -> float:
    """Mean negative log-likelihood of data rows"""
    data = as_matrix(data)
    return float(np.mean(free_energy(params, data)) + exact_log_partition(params, limit))


def exact_nll_gradient(params: RbmParams, data, limit: TinyModelLimit = DEFAULT_LIMIT) -> RbmGradient:
    """d NLL / d theta = <stats>_model - <stats>_data"""
    _check(params, limit)
    data = as_matrix(data)
    if data.shape[1] != params.n_visible:
        raise PreconditionError("Data does not match model", {'cols': data.shape[1], 'm': params.n_visible})

    states, probs = exact_marginals(params, limit)
    ph_model = logistic(states @ params.W + params.c)
    ph_data = logistic(data @ params.W + params.c)

    model_W = (states * probs[:, np.newaxis]).T @ ph_model
    model_b = probs @ states
    model_c = probs @ ph_model

    rows = data.shape[0]
    data_W = data.T @ ph_data / rows
    data_b = data.mean(axis=0)
    data_c = ph_data.mean(axis=0)
    return RbmGradient(model_W - data_W, model_b - data_b, model_c - data_c)
