"""Services driven directly, without the argument parser"""

from dataclasses import replace

import pytest

from converters import Checkpoint, get_converter
from core.errors import ConfigurationError, DataError
from core.fusion import FusionMode
from core.metrics import read_reports
from core.synthetic import make_moving_blob_dataset
from services.eval_service import REPORTS_FILE, EvalService
from services.finetune_service import FinetuneService, repetition_path
from services.fuse_service import FuseService
from services.info_service import InfoService
from services.pretrain_service import PretrainService
from services.report_service import ReportService
from services.run_service import RunService
from services.training_log import load_training_log


@pytest.fixture
def rows_dir(blob_manifest, fast_config, tmp_path):
    config = replace(fast_config, fusion='aggregative')
    FuseService(show_progress=False).run(blob_manifest, config, tmp_path / 'rows')
    return tmp_path / 'rows'


@pytest.fixture
def pretrained(rows_dir, fast_config, tmp_path):
    path = tmp_path / 'pre.ebdn'
    PretrainService(show_progress=False).run(rows_dir, fast_config, path)
    return path


class TestFuse:
    def test_one_row_per_clip(self, rows_dir):
        fused = get_converter('cache').read(rows_dir)
        assert fused.fusion_mode is FusionMode.AGGREGATIVE
        assert fused.train.n_rows == 9 and fused.test.n_rows == 6
        assert fused.fused_stats is not None


class TestPretrain:
    def test_checkpoint_and_log(self, pretrained):
        checkpoint = get_converter('checkpoint').read(pretrained)
        assert checkpoint.stack.sizes == [72 * 96, 24, 12]
        log = load_training_log(pretrained)
        assert log.fusion_mode == 'aggregative'
        assert log.first_layer_rows == 9
        assert all(len(curve) == 1 for curve in log.pretrain_recon.values())

    def test_wrong_frame_size(self, rows_dir, fast_config):
        with pytest.raises(ConfigurationError):
            PretrainService(show_progress=False).run(rows_dir, replace(fast_config, height=36),
                                                     rows_dir.parent / 'x.ebdn')


class TestFinetune:
    def test_repetitions(self, pretrained, rows_dir, fast_config, tmp_path):
        config = replace(fast_config, repetitions=2)
        outcomes = FinetuneService(show_progress=False).run(pretrained, rows_dir, config, tmp_path / 'tuned')
        assert [o.seed for o in outcomes] == [3, 4]
        assert [o.checkpoint_path.name for o in outcomes] == ['rep_0.ebdn', 'rep_1.ebdn']
        assert all(o.report is not None for o in outcomes)
        assert outcomes[0].result.stack.layers[0].fingerprint() == \
            get_converter('checkpoint').read(pretrained).stack.layers[0].fingerprint()

    def test_rerun_replaces_reports(self, pretrained, rows_dir, fast_config, tmp_path):
        config = replace(fast_config, repetitions=2)
        for _ in range(2):
            FinetuneService(show_progress=False).run(pretrained, rows_dir, config, tmp_path / 'tuned')
        reports = read_reports(tmp_path / 'tuned' / REPORTS_FILE)
        assert [r.run_id for r in reports] == ['rep_0', 'rep_1']

    def test_single_run_keeps_neighbouring_reports(self, pretrained, rows_dir, fast_config, tmp_path):
        service = FinetuneService(show_progress=False)
        for name in ('a.ebdn', 'b.ebdn', 'a.ebdn'):
            service.run(pretrained, rows_dir, fast_config, tmp_path / 'models' / name)
        reports = read_reports(tmp_path / 'models' / REPORTS_FILE)
        assert [r.run_id for r in reports] == ['b', 'a']

    def test_single_run_path(self, tmp_path):
        assert repetition_path(tmp_path / 'model.ebdn', 0, 1) == tmp_path / 'model.ebdn'
        assert repetition_path(tmp_path / 'out', 3, 5) == tmp_path / 'out' / 'rep_3.ebdn'

    def test_fusion_conflict(self, pretrained, rows_dir, fast_config, tmp_path):
        with pytest.raises(ConfigurationError):
            FinetuneService(show_progress=False).run(pretrained, rows_dir, replace(fast_config, fusion='gradient'),
                                                     tmp_path / 'x.ebdn')


class TestRun:
    def test_rerun_replaces_reports(self, blob_manifest, fast_config, tmp_path):
        config = replace(fast_config, fusion='aggregative', repetitions=2)
        for _ in range(2):
            RunService(show_progress=False).run(blob_manifest, config, tmp_path / 'run')
        assert len(read_reports(tmp_path / 'run' / REPORTS_FILE)) == 2


class TestEvalAndReport:
    def test_report_rows(self, pretrained, rows_dir, fast_config, tmp_path):
        FinetuneService(show_progress=False).run(pretrained, rows_dir, replace(fast_config, repetitions=2),
                                                 tmp_path / 'tuned')
        rows = ReportService(show_output=False).run(tmp_path / 'tuned')
        assert len(rows) == 1
        assert rows[0].runs == 2 and rows[0].label == 'A-custom'

    def test_no_test_split(self, tmp_path, fast_config):
        manifest = make_moving_blob_dataset(tmp_path / 'data', n_train=3, n_test=0, n_classes=3,
                                            seed=1, frames_per_clip=4)
        config = replace(fast_config, fusion='gradient')
        FuseService(show_progress=False).run(manifest, config, tmp_path / 'rows')
        PretrainService(show_progress=False).run(tmp_path / 'rows', config, tmp_path / 'pre.ebdn')
        outcome, = FinetuneService(show_progress=False).run(tmp_path / 'pre.ebdn', tmp_path / 'rows', config,
                                                            tmp_path / 'model.ebdn')
        assert outcome.report is None
        with pytest.raises(DataError, match='test split'):
            EvalService(show_output=False).run(tmp_path / 'model.ebdn', config, rows_dir=tmp_path / 'rows')

    def test_needs_rows_or_manifest(self, pretrained, fast_config):
        service = EvalService(show_output=False)
        with pytest.raises(ConfigurationError):
            service.load_rows(fast_config, FusionMode.AGGREGATIVE)

    def test_info(self, pretrained):
        checkpoint = InfoService(show_output=False).run(pretrained)
        assert isinstance(checkpoint, Checkpoint) and checkpoint.head == []
