"""Shared fixtures: tiny models, a small moving-blob dataset and a fast config"""

import os
import sys
from pathlib import Path

os.environ.setdefault('EBV_NO_FILE_LOG', '1')
sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

import numpy as np
import pytest

from config.experiment import ExperimentConfig
from core.numerics import RngStream
from core.rbm import RbmParams, VisibleKind
from core.synthetic import make_moving_blob_dataset


def random_rbm(m: int, n: int, seed: int = 7, scale: float = 0.5,
               kind: VisibleKind = VisibleKind.BERNOULLI) -> RbmParams:
    rng = RngStream(seed)
    return RbmParams(rng.normal((m, n), scale=scale), rng.normal((m,), scale=scale),
                     rng.normal((n,), scale=scale), kind)


@pytest.fixture
def tiny_rbm():
    """4 visible x 3 hidden bernoulli RBM"""
    return random_rbm(4, 3)


@pytest.fixture
def gaussian_rbm():
    return random_rbm(5, 3, seed=11, scale=0.2, kind=VisibleKind.GAUSSIAN)


@pytest.fixture
def rng():
    return RngStream(1234)


@pytest.fixture(scope='session')
def blob_manifest(tmp_path_factory):
    """9 train / 6 test clips, three classes, six frames each"""
    out_dir = tmp_path_factory.mktemp('blobs')
    return make_moving_blob_dataset(out_dir, n_train=9, n_test=6, n_classes=3, seed=0,
                                    frames_per_clip=6)


@pytest.fixture
def fast_config():
    """Small two-layer stack with one epoch everywhere"""
    return ExperimentConfig(
        seed=3,
        hidden=[24, 12],
        momentum=[0.5, 0.5],
        learning_rate=[1e-3, 1e-3],
        pretrain_epochs=1,
        pretrain_batch_size=16,
        finetune_epochs=2,
        finetune_batch_size=16,
        head_lr=1e-2,
        repetitions=1,
        frames_per_clip=4,
    )
