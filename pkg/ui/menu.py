#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Interactive main menu"""

from pathlib import Path
from typing import List, Optional

import questionary
from rich.align import Align
from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from config.settings import ARCH_PRESETS, FUSION_MODES

console = Console()

MENU_STYLE = questionary.Style([
    ('qmark', 'fg:#00ff00 bold'),
    ('question', 'fg:#00ffff bold'),
    ('answer', 'fg:#00ff00 bold'),
    ('pointer', 'fg:#00ffff bold'),
    ('highlighted', 'fg:#00ffff bold'),
    ('selected', 'fg:#00ff00'),
    ('separator', 'fg:#555555'),
    ('instruction', 'fg:#888888'),
    ('text', ''),
])


class MainMenu:
    """Command picker shown when main.py runs without arguments"""

    MENU_OPTIONS = [
        {"key": "run", "emoji": "🚀", "desc": "Fuse, pre-train, fine-tune and evaluate"},
        {"key": "synth", "emoji": "🧪", "desc": "Write the moving-blob toy dataset"},
        {"key": "fuse", "emoji": "🎞️", "desc": "Manifest to fused row cache"},
        {"key": "pretrain", "emoji": "🧱", "desc": "Greedy DBN pre-training"},
        {"key": "finetune", "emoji": "🎯", "desc": "Attach a head and fine-tune"},
        {"key": "eval", "emoji": "📊", "desc": "Clip-level accuracy on the test split"},
        {"key": "report", "emoji": "📋", "desc": "Aggregate run reports"},
        {"key": "info", "emoji": "🔍", "desc": "Inspect a checkpoint"},
        {"key": "logs", "emoji": "📖", "desc": "Show the latest session log"},
        {"key": "exit", "emoji": "❌", "desc": "Close application"},
    ]

    @staticmethod
    def show() -> Optional[str]:
        console.clear()
        MainMenu._show_header()
        try:
            choices = [
                questionary.Choice(title=f"{opt['emoji']} {opt['key']:<9} {opt['desc']}", value=opt['key'])
                for opt in MainMenu.MENU_OPTIONS
            ]
            return questionary.select("What would you like to do?", choices=choices, style=MENU_STYLE).ask()
        except KeyboardInterrupt:
            console.print("\n[yellow]Operation cancelled[/yellow]")
            return None

    @staticmethod
    def _show_header():
        header_text = Text()
        header_text.append("Energy-based video event recognition\n", style="bold white")
        header_text.append("RBM / DBN pre-training with frame fusion", style="dim white")

        table = Table(show_header=False, box=None, padding=(0, 3), collapse_padding=True)
        table.add_column(style="bold", no_wrap=True)
        table.add_column(style="dim white")
        table.add_row("Architectures", ", ".join(ARCH_PRESETS))
        table.add_row("Fusion", ", ".join(FUSION_MODES))

        console.print(Panel(Align.center(header_text), border_style="cyan", padding=(1, 2)))
        console.print(Align.center(table))
        console.print()

    @staticmethod
    def ask_arch(default: str = 'alpha') -> Optional[str]:
        return MainMenu.get_choice("Architecture:", list(ARCH_PRESETS), default)

    @staticmethod
    def ask_fusion(default: str = 'standard') -> Optional[str]:
        return MainMenu.get_choice("Fusion mode:", list(FUSION_MODES), default)

    @staticmethod
    def confirm(question: str, default: bool = True) -> bool:
        try:
            return bool(questionary.confirm(question, default=default, style=MENU_STYLE).ask())
        except KeyboardInterrupt:
            return False

    @staticmethod
    def pause():
        try:
            console.print("\n[dim]Press Enter to continue...[/dim]", end="")
            input()
        except KeyboardInterrupt:
            console.print()

    @staticmethod
    def get_choice(question: str, choices: List[str], default: Optional[str] = None) -> Optional[str]:
        try:
            return questionary.select(question, choices=choices, default=default, style=MENU_STYLE).ask()
        except KeyboardInterrupt:
            return None

    @staticmethod
    def get_path(question: str, default: str = "", must_exist: bool = True) -> Optional[str]:
        """Path prompt with completion; existing paths only unless must_exist is off"""
        try:
            validate = (lambda text: bool(text) and Path(text).exists()) if must_exist else None
            return questionary.path(question, default=default, style=MENU_STYLE,
                                    validate=validate).ask()
        except KeyboardInterrupt:
            return None
