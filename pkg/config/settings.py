#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Central configuration for energy-based video event recognition"""

from pathlib import Path

# Directories
BASE_DIR = Path(__file__).parent.parent
LOG_DIR = BASE_DIR / "logs"
OUTPUT_DIR = BASE_DIR / "output"

# Frame geometry
FRAME_HEIGHT = 72
FRAME_WIDTH = 96
INPUT_DIM = FRAME_HEIGHT * FRAME_WIDTH
FRAMES_PER_CLIP = 6
BORDER_THRESHOLD = 8 / 255

# Training protocol
BATCH_SIZE = 128
PRETRAIN_EPOCHS = 3
FINETUNE_EPOCHS = 3
CD_STEPS = 1
WEIGHT_INIT_STD = 0.01
HEAD_LR = 1e-3
UNFROZEN_DBN_LR = 1e-6
FROZEN_LAYERS = (0,)
REPETITIONS = 6
DEFAULT_SEED = 0

# Adam
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8

# Head initialization: "fitted" (standardized inputs, discriminant output layer) or "random"
HEAD_INIT = "fitted"
HEAD_INIT_MODES = ("fitted", "random")
LDA_SHRINKAGE = 0.1
# Top features whose spread is below this fraction of the widest are ignored by a fitted head
FLAT_FEATURE_RATIO = 1e-3

# Architecture presets, one entry per model family
ARCH_PRESETS = {
    'rbm': {
        'hidden': [2000],
        'momentum': [0.5],
        'learning_rate': [1e-3],
    },
    'alpha': {
        'hidden': [2000, 2000],
        'momentum': [0.5, 0.5],
        'learning_rate': [1e-3, 5e-4],
    },
    'beta': {
        'hidden': [2000, 2000, 2000],
        'momentum': [0.5, 0.5, 0.5],
        'learning_rate': [1e-3, 5e-4, 5e-4],
    },
    'iota': {
        'hidden': [4000, 4000],
        'momentum': [0.5, 0.5],
        'learning_rate': [5e-4, 5e-4],
    },
    'zeta': {
        'hidden': [4000, 4000, 4000],
        'momentum': [0.5, 0.5, 0.5],
        'learning_rate': [5e-4, 5e-4, 5e-4],
    },
}

FUSION_MODES = ['standard', 'aggregative', 'gradient']

# Display prefixes used in report tables
FUSION_PREFIX = {
    'standard': '',
    'aggregative': 'A-',
    'gradient': 'G-',
}

# Head widths accepted in strict mode
STRICT_HEAD_DIMS = (2000, 4000)

# Oracle enumeration limit (m + n)
ORACLE_MAX_UNITS = 20

# Exit codes
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_DIVERGENCE = 4
