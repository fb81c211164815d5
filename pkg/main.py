#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Energy-based video event recognition - command-line entry point

Commands:
    synth     write a moving-blob toy dataset
    fuse      manifest -> standardized fused rows
    pretrain  greedy RBM/DBN pre-training
    finetune  attach a head and fine-tune (optionally repeated)
    eval      clip-level accuracy on the test split
    report    mean ± std table over run reports
    run       the whole protocol for every repetition
    info      inspect a checkpoint

Without arguments an interactive menu opens.
"""

import argparse
import io
import os
import sys
from typing import List, Optional

# UTF-8 encoding setup for Windows compatibility
os.environ['PYTHONIOENCODING'] = 'utf-8'
if sys.platform == 'win32':
    sys.stdout = io.TextIOWrapper(sys.stdout.buffer, encoding='utf-8')
    sys.stderr = io.TextIOWrapper(sys.stderr.buffer, encoding='utf-8')

from rich.console import Console

from config.experiment import ExperimentConfig, load_config
from config.settings import ARCH_PRESETS, EXIT_OK, FUSION_MODES, HEAD_INIT_MODES, OUTPUT_DIR
from core.errors import EnergyVideoError
from services.eval_service import EvalService
from services.finetune_service import FinetuneService
from services.fuse_service import FuseService
from services.info_service import InfoService
from services.pretrain_service import PretrainService
from services.report_service import ReportService
from services.run_service import RunService
from services.synth_service import SynthService
from ui.display import Display
from utils.logger import get_logger

console = Console()
logger = get_logger()

VERSION = '1.0'


def _add_experiment_flags(parser: argparse.ArgumentParser, arch: bool = True, fusion: bool = True):
    parser.add_argument('--config', help="INI file with [experiment], [pretrain], [finetune] sections")
    parser.add_argument('--seed', type=int, help="base seed (repetition r uses seed + r)")
    if arch:
        parser.add_argument('--arch', choices=sorted(ARCH_PRESETS), help="architecture preset")
    if fusion:
        parser.add_argument('--fusion', choices=FUSION_MODES, help="first-layer input regime")
    parser.add_argument('--quiet', action='store_true', help="no progress bars or tables")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='main.py',
        description="RBM/DBN transfer learning for video event recognition",
    )
    parser.add_argument('-v', '--version', action='version', version=f"%(prog)s {VERSION}")
    commands = parser.add_subparsers(dest='command', metavar='command')

    synth = commands.add_parser('synth', help="write the moving-blob toy dataset")
    _add_experiment_flags(synth, arch=False, fusion=False)
    synth.add_argument('--out', required=True, help="dataset directory")
    synth.add_argument('--train', type=int, default=60, help="training clips")
    synth.add_argument('--test', type=int, default=30, help="test clips")
    synth.add_argument('--classes', type=int, default=3, help="event classes (2-4)")
    synth.add_argument('--frames', type=int, default=12, help="frames per clip")

    fuse = commands.add_parser('fuse', help="manifest -> fused row cache")
    _add_experiment_flags(fuse, arch=False)
    fuse.add_argument('--manifest', required=True)
    fuse.add_argument('--out', required=True, help="cache directory")

    pretrain = commands.add_parser('pretrain', help="greedy layer-wise pre-training")
    _add_experiment_flags(pretrain)
    pretrain.add_argument('--rows', required=True, help="fused row cache")
    pretrain.add_argument('--out', required=True, help="checkpoint file")
    pretrain.add_argument('--epochs', type=int, help="epochs per layer")
    pretrain.add_argument('--batch-size', type=int)

    finetune = commands.add_parser('finetune', help="attach a head and fine-tune")
    _add_experiment_flags(finetune)
    finetune.add_argument('--checkpoint', required=True, help="pre-trained checkpoint")
    finetune.add_argument('--rows', required=True, help="fused row cache")
    finetune.add_argument('--out', required=True, help="checkpoint file (directory when repeated)")
    finetune.add_argument('--repetitions', type=int, help="fine-tuning runs (default from config)")
    finetune.add_argument('--epochs', type=int)
    finetune.add_argument('--batch-size', type=int)
    finetune.add_argument('--head-lr', type=float)
    finetune.add_argument('--head-init', choices=HEAD_INIT_MODES, help="fitted (default) or random")

    evaluate = commands.add_parser('eval', help="clip-level accuracy on the test split")
    _add_experiment_flags(evaluate)
    evaluate.add_argument('--checkpoint', required=True)
    source = evaluate.add_mutually_exclusive_group(required=True)
    source.add_argument('--rows', help="fused row cache")
    source.add_argument('--manifest', help="manifest to fuse on the fly")
    evaluate.add_argument('--report', help="append the RunReport to this .jsonl file")

    report = commands.add_parser('report', help="aggregate run reports")
    report.add_argument('runs', help="reports.jsonl file or directory searched recursively")
    report.add_argument('--quiet', action='store_true')

    run = commands.add_parser('run', help="fuse, pre-train, fine-tune and evaluate per repetition")
    _add_experiment_flags(run)
    run.add_argument('--manifest', required=True)
    run.add_argument('--out', default=str(OUTPUT_DIR / 'runs'), help="run directory")
    run.add_argument('--repetitions', type=int)
    run.add_argument('--pretrain-epochs', type=int)
    run.add_argument('--finetune-epochs', type=int)

    info = commands.add_parser('info', help="inspect a checkpoint")
    info.add_argument('--checkpoint', required=True)
    info.add_argument('--quiet', action='store_true')
    return parser


def make_config(args: argparse.Namespace) -> ExperimentConfig:
    """INI file (when given) with command-line flags layered on top"""
    overrides = {
        'seed': getattr(args, 'seed', None),
        'arch': getattr(args, 'arch', None),
        'fusion': getattr(args, 'fusion', None),
        'repetitions': getattr(args, 'repetitions', None),
    }
    if args.command == 'pretrain':
        overrides['pretrain_epochs'] = args.epochs
        overrides['pretrain_batch_size'] = args.batch_size
    elif args.command == 'finetune':
        overrides['finetune_epochs'] = args.epochs
        overrides['finetune_batch_size'] = args.batch_size
        overrides['head_lr'] = args.head_lr
        overrides['head_init'] = args.head_init
    elif args.command == 'run':
        overrides['pretrain_epochs'] = args.pretrain_epochs
        overrides['finetune_epochs'] = args.finetune_epochs
    return load_config(getattr(args, 'config', None), **overrides)


def dispatch(args: argparse.Namespace) -> int:
    show = not args.quiet
    if args.command == 'report':
        ReportService(show).run(args.runs)
        return EXIT_OK
    if args.command == 'info':
        InfoService(show).run(args.checkpoint)
        return EXIT_OK

    config = make_config(args)
    logger.info(f"Command '{args.command}' started")
    if args.command == 'synth':
        SynthService(show).run(args.out, config, args.train, args.test, args.classes, args.frames)
    elif args.command == 'fuse':
        FuseService(show).run(args.manifest, config, args.out)
    elif args.command == 'pretrain':
        PretrainService(show).run(args.rows, config, args.out)
    elif args.command == 'finetune':
        FinetuneService(show).run(args.checkpoint, args.rows, config, args.out)
    elif args.command == 'eval':
        EvalService(show).run(args.checkpoint, config, args.rows, args.manifest, args.report)
    elif args.command == 'run':
        RunService(show).run(args.manifest, config, args.out)
    logger.info(f"Command '{args.command}' finished")
    return EXIT_OK


def run_command(argv: List[str]) -> int:
    """Parse and execute one command; returns the process exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_OK
    try:
        return dispatch(args)
    except EnergyVideoError as e:
        logger.error(f"{type(e).__name__}: {e}")
        Display.show_error(str(e), type(e).__name__)
        return e.exit_code
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        console.print("\n[yellow]Interrupted[/yellow]")
        return 130
    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True)
        Display.show_error(f"{e}\n\nCheck logs for details", "Unexpected error")
        return 1


def _interactive_argv(choice: str) -> Optional[List[str]]:
    """Ask for the arguments of one menu choice; None when the user backs out"""
    from ui.menu import MainMenu

    def pick(answer):
        if not answer:
            raise KeyboardInterrupt
        return answer

    def ask(question, default="", must_exist=True):
        return pick(MainMenu.get_path(question, default, must_exist))

    try:
        if choice == 'synth':
            return ['synth', '--out', ask("Dataset directory:", str(OUTPUT_DIR / 'synthetic'), False)]
        if choice == 'fuse':
            return ['fuse', '--manifest', ask("Manifest:"), '--fusion', pick(MainMenu.ask_fusion()),
                    '--out', ask("Cache directory:", str(OUTPUT_DIR / 'rows'), False)]
        if choice == 'pretrain':
            return ['pretrain', '--rows', ask("Fused row cache:"), '--arch', pick(MainMenu.ask_arch()),
                    '--out', ask("Checkpoint file:", str(OUTPUT_DIR / 'pretrained.ebdn'), False)]
        if choice == 'finetune':
            return ['finetune', '--checkpoint', ask("Pre-trained checkpoint:"), '--rows', ask("Fused row cache:"),
                    '--out', ask("Output directory:", str(OUTPUT_DIR / 'finetuned'), False)]
        if choice == 'eval':
            return ['eval', '--checkpoint', ask("Checkpoint:"), '--rows', ask("Fused row cache:")]
        if choice == 'report':
            return ['report', ask("Reports file or run directory:", str(OUTPUT_DIR / 'runs'))]
        if choice == 'run':
            return ['run', '--manifest', ask("Manifest:"), '--arch', pick(MainMenu.ask_arch()),
                    '--fusion', pick(MainMenu.ask_fusion()),
                    '--out', ask("Run directory:", str(OUTPUT_DIR / 'runs'), False)]
        if choice == 'info':
            return ['info', '--checkpoint', ask("Checkpoint:")]
    except KeyboardInterrupt:
        return None
    return None


def interactive() -> int:
    from ui.menu import MainMenu

    logger.info("Interactive session started")
    while True:
        try:
            choice = MainMenu.show()
            if choice is None:
                continue
            if choice == 'exit':
                logger.info("Application closed by user")
                console.print("\n[yellow]👋 Goodbye![/yellow]\n")
                return EXIT_OK
            if choice == 'logs':
                Display.show_logs()
                MainMenu.pause()
                continue
            argv = _interactive_argv(choice)
            if argv is not None:
                run_command(argv)
            MainMenu.pause()
        except KeyboardInterrupt:
            if MainMenu.confirm("\nAre you sure you want to exit?", default=False):
                logger.info("Application closed by user (Ctrl+C)")
                return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if not argv:
        return interactive()
    return run_command(argv)


if __name__ == '__main__':
    sys.exit(main())
