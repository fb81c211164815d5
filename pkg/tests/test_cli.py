"""Command-line surface: exit codes and files written by each command"""

import json

import pytest

from converters import CheckpointConverter
from core.fusion import FusionMode
from core.metrics import read_reports
from main import _interactive_argv, build_parser, run_command
from ui.menu import MainMenu
from services.training_log import load_training_log

FAST_INI = """
[experiment]
seed = 5
frames_per_clip = 4

[pretrain]
epochs = 1
batch_size = 32
hidden = 16, 8
momentum = 0.5, 0.5
learning_rate = 1e-3, 1e-3

[finetune]
epochs = 2
batch_size = 16
head_lr = 0.01
"""


@pytest.fixture(scope='module')
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp('cli')
    config = root / 'fast.ini'
    config.write_text(FAST_INI, encoding='utf-8')
    assert run_command(['synth', '--out', str(root / 'data'), '--train', '6', '--test', '3',
                        '--frames', '4', '--quiet']) == 0
    assert run_command(['fuse', '--manifest', str(root / 'data' / 'manifest.tsv'), '--fusion', 'gradient',
                        '--config', str(config), '--out', str(root / 'rows'), '--quiet']) == 0
    assert run_command(['pretrain', '--rows', str(root / 'rows'), '--config', str(config),
                        '--out', str(root / 'pre.ebdn'), '--quiet']) == 0
    return root


def args(workspace, *extra):
    return list(extra) + ['--config', str(workspace / 'fast.ini'), '--quiet']


class TestPipelineCommands:
    def test_fused_cache(self, workspace):
        meta = json.loads((workspace / 'rows' / 'meta.json').read_text())
        assert meta['fusion_mode'] == 'gradient'
        assert len(meta['train_clip_ids']) == 6 and len(meta['test_clip_ids']) == 3

    def test_pretrained_checkpoint(self, workspace):
        checkpoint = CheckpointConverter().read(workspace / 'pre.ebdn')
        assert checkpoint.stack.sizes == [72 * 96, 16, 8]
        assert checkpoint.stack.fusion_mode is FusionMode.GRADIENT
        assert checkpoint.stack.arch_name == 'custom'
        assert checkpoint.head == []
        log = load_training_log(workspace / 'pre.ebdn')
        assert log.seed == 5 and sorted(log.pretrain_recon) == ['0', '1']
        assert log.first_layer_rows == 6 * 3

    def test_finetune_repetitions(self, workspace):
        out = workspace / 'tuned'
        code = run_command(args(workspace, 'finetune', '--checkpoint', str(workspace / 'pre.ebdn'),
                                '--rows', str(workspace / 'rows'), '--out', str(out), '--repetitions', '2'))
        assert code == 0
        assert (out / 'rep_0.ebdn').is_file() and (out / 'rep_1.ebdn').is_file()
        reports = read_reports(out / 'reports.jsonl')
        assert [r.seed for r in reports] == [5, 6]
        assert all(0.0 <= r.accuracy <= 1.0 for r in reports)
        log = load_training_log(out / 'rep_1.ebdn')
        assert len(log.finetune_epoch_losses) == 2 and log.frozen_layers == [0]
        assert len(log.finetune_losses) == 2 * 2

        pretrained = CheckpointConverter().read(workspace / 'pre.ebdn')
        tuned = CheckpointConverter().read(out / 'rep_0.ebdn')
        assert tuned.stack.layers[0].fingerprint() == pretrained.stack.layers[0].fingerprint()
        assert tuned.adam is not None and len(tuned.head) == 2

    def test_eval_and_report(self, workspace):
        out = workspace / 'single.ebdn'
        assert run_command(args(workspace, 'finetune', '--checkpoint', str(workspace / 'pre.ebdn'),
                                '--rows', str(workspace / 'rows'), '--out', str(out),
                                '--repetitions', '1')) == 0
        report_file = workspace / 'eval' / 'reports.jsonl'
        assert run_command(args(workspace, 'eval', '--checkpoint', str(out), '--rows', str(workspace / 'rows'),
                                '--report', str(report_file))) == 0
        assert run_command(args(workspace, 'eval', '--checkpoint', str(out), '--rows', str(workspace / 'rows'),
                                '--report', str(report_file))) == 0
        first, second = read_reports(report_file)
        assert first.accuracy == second.accuracy and first.confusion == second.confusion
        assert run_command(['report', str(report_file), '--quiet']) == 0

    def test_eval_from_manifest(self, workspace):
        out = workspace / 'from_manifest.ebdn'
        assert run_command(args(workspace, 'finetune', '--checkpoint', str(workspace / 'pre.ebdn'),
                                '--rows', str(workspace / 'rows'), '--out', str(out),
                                '--repetitions', '1')) == 0
        assert run_command(args(workspace, 'eval', '--checkpoint', str(out),
                                '--manifest', str(workspace / 'data' / 'manifest.tsv'))) == 0

    def test_info(self, workspace):
        assert run_command(['info', '--checkpoint', str(workspace / 'pre.ebdn'), '--quiet']) == 0

    def test_rendered_output(self, workspace, capsys):
        tuned = workspace / 'rendered.ebdn'
        assert run_command(args(workspace, 'finetune', '--checkpoint', str(workspace / 'pre.ebdn'),
                                '--rows', str(workspace / 'rows'), '--out', str(tuned),
                                '--repetitions', '1')) == 0
        capsys.readouterr()
        assert run_command(['eval', '--checkpoint', str(tuned), '--rows', str(workspace / 'rows'),
                            '--config', str(workspace / 'fast.ini')]) == 0
        assert run_command(['info', '--checkpoint', str(tuned)]) == 0
        assert run_command(['report', str(workspace / 'reports.jsonl')]) == 0
        out = capsys.readouterr().out
        assert 'Accuracy' in out and 'frozen' in out and 'G-custom' in out

    def test_run_is_reproducible(self, workspace):
        manifest = str(workspace / 'data' / 'manifest.tsv')
        for name in ('run_a', 'run_b'):
            assert run_command(args(workspace, 'run', '--manifest', manifest, '--fusion', 'aggregative',
                                    '--repetitions', '2', '--out', str(workspace / name))) == 0
        assert len(read_reports(workspace / 'run_a' / 'reports.jsonl')) == 2
        for rep in ('rep_0', 'rep_1'):
            a = (workspace / 'run_a' / rep / 'model.ebdn').read_bytes()
            b = (workspace / 'run_b' / rep / 'model.ebdn').read_bytes()
            assert a == b
        assert (workspace / 'run_a' / 'rep_0' / 'model.ebdn').read_bytes() != \
            (workspace / 'run_a' / 'rep_1' / 'model.ebdn').read_bytes()


class TestExitCodes:
    def test_fusion_mismatch(self, workspace):
        code = run_command(args(workspace, 'pretrain', '--rows', str(workspace / 'rows'), '--fusion', 'aggregative',
                                '--out', str(workspace / 'never.ebdn')))
        assert code == 2
        assert not (workspace / 'never.ebdn').exists()

    def test_missing_manifest(self, workspace):
        code = run_command(['fuse', '--manifest', str(workspace / 'absent.tsv'), '--out',
                            str(workspace / 'x'), '--quiet'])
        assert code == 3

    def test_eval_without_head(self, workspace):
        code = run_command(args(workspace, 'eval', '--checkpoint', str(workspace / 'pre.ebdn'),
                                '--rows', str(workspace / 'rows')))
        assert code == 2

    def test_report_without_runs(self, tmp_path):
        assert run_command(['report', str(tmp_path), '--quiet']) == 3

    def test_bad_config(self, workspace, tmp_path):
        bad = tmp_path / 'bad.ini'
        bad.write_text("[pretrain]\nwarmup = 1\n", encoding='utf-8')
        code = run_command(['pretrain', '--rows', str(workspace / 'rows'), '--config', str(bad),
                            '--out', str(tmp_path / 'x.ebdn'), '--quiet'])
        assert code == 2

    def test_unknown_arch_is_a_usage_error(self):
        with pytest.raises(SystemExit) as info:
            build_parser().parse_args(['pretrain', '--rows', 'r', '--out', 'o', '--arch', 'omega'])
        assert info.value.code == 2

    def test_no_command_prints_help(self, capsys):
        assert run_command([]) == 0
        assert 'fuse' in capsys.readouterr().out


class TestInteractiveMenu:
    @pytest.fixture
    def answers(self, monkeypatch):
        monkeypatch.setattr(MainMenu, 'get_path', staticmethod(lambda question, default="", must_exist=True:
                                                               default or f"/data/{question.rstrip(':')}"))
        monkeypatch.setattr(MainMenu, 'ask_arch', staticmethod(lambda default='alpha': 'beta'))
        monkeypatch.setattr(MainMenu, 'ask_fusion', staticmethod(lambda default='standard': 'gradient'))

    def test_pretrain_choice(self, answers):
        argv = _interactive_argv('pretrain')
        assert argv[:2] == ['pretrain', '--rows']
        assert argv[argv.index('--arch') + 1] == 'beta'
        assert argv[-1].endswith('pretrained.ebdn')
        build_parser().parse_args(argv)

    def test_every_choice_parses(self, answers):
        for option in MainMenu.MENU_OPTIONS:
            if option['key'] in ('logs', 'exit'):
                continue
            argv = _interactive_argv(option['key'])
            assert build_parser().parse_args(argv).command == option['key']

    def test_backing_out(self, monkeypatch):
        monkeypatch.setattr(MainMenu, 'get_path', staticmethod(lambda *a, **k: None))
        assert _interactive_argv('fuse') is None
