#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Rich styles for reports and summaries"""

from rich.theme import Theme

# One color per input regime in tables and panels
FUSION_COLORS = {
    'standard': 'bold white',
    'aggregative': 'bold magenta',
    'gradient': 'bold cyan',
}

CUSTOM_THEME = Theme({
    "field": "cyan bold",
    "value": "white",
    "accuracy": "bold green",
    "frozen": "blue",
    "trainable": "yellow",
    **{f"fusion.{mode}": color for mode, color in FUSION_COLORS.items()},
})
