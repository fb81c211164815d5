#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Progress bars for ingestion and training"""

from typing import Callable, Dict, List, Optional

from rich.console import Console
from rich.progress import (
    BarColumn,
    MofNCompleteColumn,
    Progress,
    SpinnerColumn,
    TextColumn,
    TimeElapsedColumn,
    TimeRemainingColumn,
)

console = Console()


def get_training_progress(transient: bool = False) -> Progress:
    """Progress bar shared by every long-running command"""
    return Progress(
        SpinnerColumn(spinner_name="dots12", style="cyan"),
        TextColumn("[bold blue]{task.description}", justify="left"),
        BarColumn(
            bar_width=40,
            style="cyan",
            complete_style="green",
            finished_style="bold green"
        ),
        MofNCompleteColumn(),
        TextColumn("•"),
        TimeElapsedColumn(),
        TextColumn("•"),
        TimeRemainingColumn(),
        console=console,
        transient=transient
    )


def clip_callback(progress: Optional[Progress], description: str, total: int) -> Optional[Callable[[int], None]]:
    """One task advancing by clips; None when progress display is off"""
    if progress is None:
        return None
    task = progress.add_task(description, total=total)
    return lambda count: progress.update(task, advance=count)


def layer_callback(progress: Optional[Progress], layer_rows: List[int],
                   epochs: List[int]) -> Optional[Callable[[int, int], None]]:
    """
    One task per DBN layer, each advancing by rows

    Returns a pretrain_greedy-compatible callback(layer, rows_done).
    """
    if progress is None:
        return None
    tasks: Dict[int, int] = {}
    for layer, (rows, n_epochs) in enumerate(zip(layer_rows, epochs)):
        tasks[layer] = progress.add_task(f"Layer {layer + 1}", total=rows * n_epochs)
    return lambda layer, done: progress.update(tasks[layer], advance=done)
