#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Tables and panels for training results"""

from __future__ import annotations

from datetime import datetime
from pathlib import Path
from typing import List, Optional, Sequence

from rich import box
from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from config.settings import LOG_DIR
from config.theme import CUSTOM_THEME, FUSION_COLORS

console = Console(theme=CUSTOM_THEME)


# -------- Helpers --------
def ellipsis(s: str, max_len: int = 80) -> str:
    return s if len(s) <= max_len else s[:max_len - 3] + "..."


def _fusion_style(mode: str) -> str:
    return f"fusion.{mode}" if mode in FUSION_COLORS else "value"


class Display:
    """Rich renderings of reports, checkpoints and pipeline summaries"""

    @staticmethod
    def report_table(rows) -> Table:
        """One line per (architecture, fusion) group: accuracy and minutes as mean ± std"""
        table = Table(title="Clip-level accuracy", header_style="bold cyan", box=box.SIMPLE_HEAVY)
        table.add_column("Model", no_wrap=True)
        table.add_column("Runs", justify="right")
        table.add_column("Accuracy (%)", justify="right")
        table.add_column("Time (min)", justify="right")
        for row in rows:
            table.add_row(
                Text(row.label, style=_fusion_style(row.fusion_mode)),
                str(row.runs),
                row.accuracy_text,
                row.time_text,
            )
        return table

    @staticmethod
    def show_report(rows):
        console.print()
        console.print(Display.report_table(rows))
        console.print()

    @staticmethod
    def confusion_table(matrix, class_names: Optional[Sequence[str]] = None) -> Table:
        n = len(matrix)
        names = list(class_names) if class_names else [str(i) for i in range(n)]
        table = Table(title="Confusion (rows: true, columns: predicted)",
                      header_style="bold cyan", box=box.MINIMAL)
        table.add_column("", style="bold")
        for name in names:
            table.add_column(ellipsis(name, 12), justify="right")
        for i, row in enumerate(matrix):
            cells = [f"[bold green]{v}[/bold green]" if i == j else str(v) for j, v in enumerate(row)]
            table.add_row(ellipsis(names[i], 16), *cells)
        return table

    @staticmethod
    def show_run_report(report, class_names: Optional[Sequence[str]] = None):
        """Accuracy panel plus confusion matrix for one evaluation"""
        info = Text()
        info.append("Run:        ", style="field")
        info.append(f"{report.run_id}\n", style="value")
        info.append("Model:      ", style="field")
        info.append(f"{report.arch_name} ({report.fusion_mode})\n", style=_fusion_style(report.fusion_mode))
        info.append("Seed:       ", style="field")
        info.append(f"{report.seed}\n", style="value")
        info.append("Accuracy:   ", style="field")
        info.append(f"{report.accuracy * 100:.2f}%\n", style="accuracy")
        info.append("Wall time:  ", style="field")
        info.append(f"{report.total_seconds / 60:.2f} min", style="value")
        console.print(Panel(info, title="[bold cyan]📊 Evaluation[/bold cyan]",
                            border_style="cyan", padding=(0, 1), expand=False))
        console.print(Display.confusion_table(report.confusion, class_names))
        console.print()

    @staticmethod
    def show_checkpoint_info(checkpoint, path: Path, frozen_layers: Optional[Sequence[int]] = None):
        """Header of a checkpoint: architecture, fusion, layer and head shapes"""
        stack = checkpoint.stack
        table = Table(show_header=True, header_style="bold cyan", box=box.MINIMAL)
        table.add_column("Part")
        table.add_column("Shape", justify="right")
        table.add_column("Units")
        tuned = frozen_layers is not None and bool(checkpoint.head)
        if tuned:
            table.add_column("Fine-tuning")
        for index, layer in enumerate(stack.layers):
            row = [f"RBM {index + 1}", f"{layer.n_visible} × {layer.n_hidden}", f"{layer.visible_kind.value} visible"]
            if tuned:
                row.append("[frozen]frozen[/frozen]" if index in frozen_layers else "[trainable]trainable[/trainable]")
            table.add_row(*row)
        for index, layer in enumerate(checkpoint.head):
            row = [f"Head {index + 1}", f"{layer.n_in} × {layer.n_out}", layer.activation.value]
            if tuned:
                row.append("[trainable]trainable[/trainable]")
            table.add_row(*row)

        header = Text()
        header.append("File:         ", style="field")
        header.append(ellipsis(str(path), 90) + "\n", style="dim white")
        header.append("Architecture: ", style="field")
        header.append(f"{stack.arch_name}\n", style="value")
        header.append("Fusion:       ", style="field")
        header.append(f"{stack.fusion_mode.value}\n", style=_fusion_style(stack.fusion_mode.value))
        header.append("Optimizer:    ", style="field")
        header.append("Adam state stored" if checkpoint.adam is not None else "none", style="value")
        if checkpoint.adam is not None:
            header.append(f" (step {checkpoint.adam.t}, {len(checkpoint.adam.names)} tensors)", style="dim")

        console.print(Panel(header, title="[bold cyan]📋 Checkpoint[/bold cyan]",
                            border_style="cyan", padding=(0, 1), expand=False))
        console.print(table)
        console.print()

    @staticmethod
    def show_fused_summary(fused, out_dir: Path):
        table = Table(show_header=False, box=box.MINIMAL, padding=(0, 2), pad_edge=False)
        table.add_column(style="bold", no_wrap=True)
        table.add_column()
        table.add_row("Fusion:", Text(fused.fusion_mode.value, style=_fusion_style(fused.fusion_mode.value)))
        table.add_row("Classes:", str(fused.n_classes))
        table.add_row("Train:", f"{len(fused.train.clip_ids)} clips, {fused.train.n_rows} rows")
        if fused.test is not None:
            table.add_row("Test:", f"{len(fused.test.clip_ids)} clips, {fused.test.n_rows} rows")
        table.add_row("Features:", str(fused.train.rows.shape[1]))
        table.add_row("Output:", f"[dim cyan]{ellipsis(str(out_dir), 90)}[/dim cyan]")
        console.print(Panel(table, title="[bold cyan]🎞️  Fused rows[/bold cyan]",
                            border_style="cyan", padding=(1, 2)))

    @staticmethod
    def show_pretrain_summary(result, out_path: Path):
        """Final reconstruction error of every layer"""
        table = Table(header_style="bold cyan", box=box.MINIMAL)
        table.add_column("Layer")
        table.add_column("Shape", justify="right")
        table.add_column("Epochs", justify="right")
        table.add_column("Final recon. error", justify="right")
        for index, layer in enumerate(result.stack.layers):
            logs = result.logs.get(index, [])
            final = f"{logs[-1].reconstruction_error:.6f}" if logs else "-"
            table.add_row(str(index + 1), f"{layer.n_visible} × {layer.n_hidden}", str(len(logs)), final)
        console.print(Panel(table, title=f"[bold cyan]🧱 Pre-training ({result.seconds / 60:.2f} min)[/bold cyan]",
                            subtitle=f"[dim]{ellipsis(str(out_path), 70)}[/dim]",
                            border_style="cyan", padding=(1, 2)))

    @staticmethod
    def show_finetune_summary(results: List, out_paths: List[Path]):
        table = Table(header_style="bold cyan", box=box.MINIMAL)
        table.add_column("Rep", justify="right")
        table.add_column("Final loss", justify="right")
        table.add_column("Train accuracy", justify="right")
        table.add_column("Seconds", justify="right")
        table.add_column("Checkpoint")
        for rep, (result, path) in enumerate(zip(results, out_paths)):
            last = result.epochs[-1]
            table.add_row(str(rep), f"{last.loss:.4f}", f"{last.accuracy * 100:.2f}%",
                          f"{result.seconds:.1f}", f"[dim]{ellipsis(str(path), 50)}[/dim]")
        console.print(Panel(table, title="[bold cyan]🎯 Fine-tuning[/bold cyan]",
                            border_style="cyan", padding=(1, 2)))

    @staticmethod
    def show_logs(lines: int = 40):
        """Tail of the most recent session log"""
        log_files = list(LOG_DIR.glob("events_*.log"))
        if not log_files:
            Display.show_warning("No log files found.\n\nLogs are written once a command runs.", "No Logs")
            return
        latest_log = max(log_files, key=lambda p: p.stat().st_mtime)
        modified = datetime.fromtimestamp(latest_log.stat().st_mtime).strftime('%Y-%m-%d %H:%M:%S')

        log_table = Table(show_header=True, header_style="bold cyan", box=box.MINIMAL,
                          padding=(0, 1), collapse_padding=True, pad_edge=False)
        log_table.add_column("Time", style="dim", width=19, no_wrap=True)
        log_table.add_column("Level", width=8, no_wrap=True)
        log_table.add_column("Message", style="white", overflow="fold", max_width=100)
        with open(latest_log, 'r', encoding='utf-8', errors='ignore') as f:
            tail = f.readlines()[-lines:]
        for line in tail:
            parts = line.strip().split(' - ', 3)
            if len(parts) < 4 or '=' * 10 in line:
                continue
            timestamp, _, level, message = parts
            style = {'ERROR': 'bold red', 'WARNING': 'bold yellow', 'INFO': 'bold green'}.get(level, 'dim cyan')
            log_table.add_row(timestamp[-19:], f"[{style}]{level}[/{style}]", ellipsis(message, 100))
        console.print(Panel(log_table, title=f"[bold cyan]📖 {latest_log.name}[/bold cyan]",
                            subtitle=f"[dim]modified {modified}[/dim]", border_style="cyan", padding=(1, 2)))

    @staticmethod
    def show_error(message: str, title: str = "Error"):
        panel = Panel(f"[red]{message}[/red]",
                      title=f"[bold red]❌ {title}[/bold red]",
                      border_style="red", padding=(1, 2))
        console.print("\n", panel, "\n")

    @staticmethod
    def show_success(message: str, title: str = "Success"):
        panel = Panel(f"[green]{message}[/green]",
                      title=f"[bold green]✅ {title}[/bold green]",
                      border_style="green", padding=(1, 2))
        console.print("\n", panel, "\n")

    @staticmethod
    def show_warning(message: str, title: str = "Warning"):
        panel = Panel(f"[yellow]{message}[/yellow]",
                      title=f"[bold yellow]⚠️  {title}[/bold yellow]",
                      border_style="yellow", padding=(1, 2))
        console.print("\n", panel, "\n")
