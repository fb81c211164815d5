#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Experiment configuration

An INI file with three sections; any key may be omitted and falls back to
the protocol defaults in config.settings:

    [experiment]
    seed = 0
    arch = alpha
    fusion = aggregative
    repetitions = 6
    frames_per_clip = 6
    height = 72
    width = 96

    [pretrain]
    epochs = 3
    batch_size = 128
    k = 1
    hidden = 2000, 2000          ; overrides the preset layer sizes
    momentum = 0.5, 0.5
    learning_rate = 1e-3, 5e-4

    [finetune]
    epochs = 3
    batch_size = 128
    head_lr = 1e-3
    unfrozen_dbn_lr = 1e-6
    frozen_layers = 0
    strict_head = false
    head_init = fitted          ; or random

Command-line flags override file values.
"""

import configparser
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional

from config.settings import (
    ARCH_PRESETS, BATCH_SIZE, CD_STEPS, DEFAULT_SEED, FINETUNE_EPOCHS, FRAME_HEIGHT,
    FRAME_WIDTH, FRAMES_PER_CLIP, FROZEN_LAYERS, HEAD_INIT, HEAD_INIT_MODES, HEAD_LR, PRETRAIN_EPOCHS,
    REPETITIONS, UNFROZEN_DBN_LR,
)
from core.dbn import CUSTOM_ARCH
from core.errors import ConfigurationError
from core.fusion import FusionMode
from utils.logger import get_logger

logger = get_logger()

SECTIONS = ('experiment', 'pretrain', 'finetune')
DEFAULT_ARCH = 'alpha'


@dataclass
class ExperimentConfig:
    seed: int = DEFAULT_SEED
    # None: taken from the checkpoint or cache being processed
    arch: Optional[str] = None
    fusion: Optional[str] = None
    repetitions: int = REPETITIONS
    frames_per_clip: int = FRAMES_PER_CLIP
    height: int = FRAME_HEIGHT
    width: int = FRAME_WIDTH

    pretrain_epochs: int = PRETRAIN_EPOCHS
    pretrain_batch_size: int = BATCH_SIZE
    k: int = CD_STEPS
    hidden: Optional[List[int]] = None
    momentum: Optional[List[float]] = None
    learning_rate: Optional[List[float]] = None

    finetune_epochs: int = FINETUNE_EPOCHS
    finetune_batch_size: int = BATCH_SIZE
    head_lr: float = HEAD_LR
    unfrozen_dbn_lr: float = UNFROZEN_DBN_LR
    frozen_layers: List[int] = field(default_factory=lambda: list(FROZEN_LAYERS))
    strict_head: bool = False
    head_init: str = HEAD_INIT

    source: Optional[Path] = None

    def __post_init__(self):
        self.validate()

    @property
    def fusion_mode(self) -> FusionMode:
        return FusionMode.STANDARD if self.fusion is None else FusionMode.parse(self.fusion)

    @property
    def arch_name(self) -> str:
        if self.arch is not None:
            return self.arch
        return CUSTOM_ARCH if self.hidden is not None else DEFAULT_ARCH

    def resolve_fusion(self, found: FusionMode) -> FusionMode:
        """Fusion mode of existing data, checked against an explicit setting"""
        if self.fusion is not None and self.fusion_mode is not found:
            raise ConfigurationError("Fusion mode does not match the data",
                                     {'configured': self.fusion, 'found': found.value})
        return found

    def resolve_arch(self, found: str) -> str:
        if self.arch is not None and self.arch != found:
            raise ConfigurationError("Architecture does not match the checkpoint",
                                     {'configured': self.arch, 'found': found})
        return found

    @property
    def input_dim(self) -> int:
        return self.height * self.width

    def layer_plan(self) -> Dict[str, List]:
        """Hidden sizes, momenta and learning rates, preset values filled in"""
        preset = ARCH_PRESETS.get(self.arch_name, {})
        hidden = self.hidden if self.hidden is not None else preset.get('hidden')
        if hidden is None:
            raise ConfigurationError(f"Architecture '{self.arch_name}' needs explicit hidden sizes")
        momentum = self.momentum if self.momentum is not None else preset.get('momentum', [0.5] * len(hidden))
        learning_rate = (self.learning_rate if self.learning_rate is not None
                         else preset.get('learning_rate', [1e-3] * len(hidden)))
        if not (len(hidden) == len(momentum) == len(learning_rate)):
            raise ConfigurationError(
                "hidden, momentum and learning_rate must have the same length",
                {'hidden': len(hidden), 'momentum': len(momentum), 'learning_rate': len(learning_rate)}
            )
        return {'hidden': list(hidden), 'momentum': list(momentum), 'learning_rate': list(learning_rate)}

    def validate(self) -> None:
        if self.arch is not None:
            self.arch = str(self.arch).lower()
        if self.fusion is not None:
            self.fusion = self.fusion_mode.value
        if self.arch_name not in ARCH_PRESETS and self.hidden is None:
            raise ConfigurationError(f"Unknown architecture '{self.arch_name}'",
                                     {'choices': ', '.join(ARCH_PRESETS)})
        positive = {
            'repetitions': self.repetitions, 'frames_per_clip': self.frames_per_clip,
            'height': self.height, 'width': self.width, 'k': self.k,
            'pretrain_epochs': self.pretrain_epochs, 'pretrain_batch_size': self.pretrain_batch_size,
            'finetune_epochs': self.finetune_epochs, 'finetune_batch_size': self.finetune_batch_size,
        }
        for key, value in positive.items():
            if value < 1:
                raise ConfigurationError(f"'{key}' must be positive", {key: value})
        if self.seed < 0:
            raise ConfigurationError("Seed must be a non-negative integer", {'seed': self.seed})
        if self.head_lr < 0 or self.unfrozen_dbn_lr < 0:
            raise ConfigurationError("Learning rates must be non-negative")
        self.head_init = str(self.head_init).strip().lower()
        if self.head_init not in HEAD_INIT_MODES:
            raise ConfigurationError(f"Unknown head initialization '{self.head_init}'",
                                     {'choices': ', '.join(HEAD_INIT_MODES)})
        plan = self.layer_plan()
        for index in self.frozen_layers:
            if not 0 <= index < len(plan['hidden']):
                raise ConfigurationError("Frozen layer index out of range",
                                         {'layer': index, 'layers': len(plan['hidden'])})

    def with_overrides(self, **overrides: Any) -> "ExperimentConfig":
        """Copy with every non-None override applied"""
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigurationError("Unknown configuration keys", {'keys': ', '.join(sorted(unknown))})
        changes = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **changes)


def _int_list(text: str) -> List[int]:
    return [int(part) for part in text.replace(';', ',').split(',') if part.strip()]


def _float_list(text: str) -> List[float]:
    return [float(part) for part in text.replace(';', ',').split(',') if part.strip()]


# INI section -> {key: (dataclass field, parser)}
_KEYS = {
    'experiment': {
        'seed': ('seed', int),
        'arch': ('arch', str),
        'fusion': ('fusion', str),
        'repetitions': ('repetitions', int),
        'frames_per_clip': ('frames_per_clip', int),
        'height': ('height', int),
        'width': ('width', int),
    },
    'pretrain': {
        'epochs': ('pretrain_epochs', int),
        'batch_size': ('pretrain_batch_size', int),
        'k': ('k', int),
        'hidden': ('hidden', _int_list),
        'momentum': ('momentum', _float_list),
        'learning_rate': ('learning_rate', _float_list),
    },
    'finetune': {
        'epochs': ('finetune_epochs', int),
        'batch_size': ('finetune_batch_size', int),
        'head_lr': ('head_lr', float),
        'unfrozen_dbn_lr': ('unfrozen_dbn_lr', float),
        'frozen_layers': ('frozen_layers', _int_list),
        'strict_head': ('strict_head', None),
        'head_init': ('head_init', str),
    },
}


def load_config(path=None, **overrides: Any) -> ExperimentConfig:
    """
    Build an ExperimentConfig from an optional INI file plus overrides

    Raises:
        ConfigurationError: unreadable file, unknown section or key, bad value
    """
    values: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigurationError("Configuration file not found", {'path': str(path)})
        parser = configparser.ConfigParser(inline_comment_prefixes=(';', '#'))
        try:
            parser.read(path, encoding='utf-8')
        except configparser.Error as e:
            raise ConfigurationError(f"Malformed configuration file: {e}", {'path': str(path)}) from None

        for section in parser.sections():
            if section not in _KEYS:
                raise ConfigurationError(f"Unknown section [{section}]",
                                         {'path': str(path), 'choices': ', '.join(SECTIONS)})
            for key, raw in parser.items(section):
                if key not in _KEYS[section]:
                    raise ConfigurationError(f"Unknown key '{key}' in [{section}]", {'path': str(path)})
                target, convert = _KEYS[section][key]
                try:
                    values[target] = (parser.getboolean(section, key) if convert is None
                                      else convert(raw))
                except ValueError:
                    raise ConfigurationError(f"Invalid value for '{key}' in [{section}]",
                                             {'value': raw}) from None
        values['source'] = path
        logger.debug(f"Loaded configuration from {path}: {values}")

    config = ExperimentConfig(**values)
    return config.with_overrides(**overrides) if overrides else config
