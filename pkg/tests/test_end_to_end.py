"""Full fuse -> pre-train -> fine-tune -> evaluate runs on the moving-blob data"""

import numpy as np
import pytest

from config.experiment import ExperimentConfig
from converters import Checkpoint, CheckpointConverter
from core.fusion import FusionMode
from core.pipeline import build_fused_rows, load_manifest
from core.synthetic import make_moving_blob_dataset
from services.eval_service import evaluate_split
from services.finetune_service import FinetuneService
from services.pretrain_service import PretrainService

pytestmark = pytest.mark.slow

N_TRAIN, N_TEST, FRAMES = 300, 60, 6


@pytest.fixture(scope='module')
def blobs(tmp_path_factory):
    manifest = make_moving_blob_dataset(tmp_path_factory.mktemp('blobs'), n_train=N_TRAIN, n_test=N_TEST,
                                        n_classes=3, seed=1, frames_per_clip=FRAMES)
    return load_manifest(manifest)


@pytest.fixture(scope='module')
def fused_by_mode(blobs):
    return {mode: build_fused_rows(blobs, mode, k=FRAMES) for mode in FusionMode}


def experiment(**overrides):
    values = dict(seed=2, hidden=[256, 128], momentum=[0.5, 0.5], learning_rate=[1e-3, 1e-3],
                  pretrain_epochs=3, pretrain_batch_size=128, finetune_epochs=3, finetune_batch_size=128,
                  repetitions=1, frames_per_clip=FRAMES)
    values.update(overrides)
    return ExperimentConfig(**values)


def train_and_evaluate(fused, config, split=None, name=None):
    pretrained = PretrainService(show_progress=False).train(config, fused)
    tuned = FinetuneService(show_progress=False).finetune_once(Checkpoint(pretrained.stack), fused, config, config.seed)
    return evaluate_split(Checkpoint(tuned.stack, tuned.head), split or fused.test, fused.n_classes,
                          name or fused.fusion_mode.value, seed=config.seed)


@pytest.mark.parametrize('mode', [FusionMode.AGGREGATIVE, FusionMode.GRADIENT])
def test_learns_motion_direction(fused_by_mode, mode):
    report = train_and_evaluate(fused_by_mode[mode], experiment())
    assert report.accuracy >= 0.9
    assert np.asarray(report.confusion).sum() == N_TEST


def test_standard_fusion_is_reported(fused_by_mode):
    report = train_and_evaluate(fused_by_mode[FusionMode.STANDARD], experiment())
    assert 0.0 <= report.accuracy <= 1.0
    assert np.asarray(report.confusion).sum() == N_TEST


def test_pretraining_cost_follows_row_count(fused_by_mode):
    results = {mode: PretrainService(show_progress=False).train(experiment(), fused_by_mode[mode])
               for mode in FusionMode}
    aggregative = results[FusionMode.AGGREGATIVE]
    gradient = results[FusionMode.GRADIENT]
    standard = results[FusionMode.STANDARD]
    assert aggregative.first_layer_rows == N_TRAIN
    assert gradient.first_layer_rows == N_TRAIN * (FRAMES - 1)
    assert standard.first_layer_rows == N_TRAIN * FRAMES
    assert aggregative.seconds < gradient.seconds < standard.seconds


def test_pretraining_is_bitwise_reproducible(fused_by_mode):
    config = experiment()
    fused = fused_by_mode[FusionMode.GRADIENT]
    converter = CheckpointConverter()
    first = converter.encode(Checkpoint(PretrainService(show_progress=False).train(config, fused).stack))
    second = converter.encode(Checkpoint(PretrainService(show_progress=False).train(config, fused).stack))
    assert first == second


def test_memorizes_small_training_set(tmp_path):
    manifest = load_manifest(make_moving_blob_dataset(tmp_path, n_train=5, n_test=0, n_classes=3,
                                                      seed=4, frames_per_clip=FRAMES))
    fused = build_fused_rows(manifest, FusionMode.AGGREGATIVE, k=FRAMES)
    report = train_and_evaluate(fused, experiment(finetune_batch_size=5), split=fused.train, name='memorize')
    assert report.accuracy == 1.0
