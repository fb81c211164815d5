#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Aggregate run reports into a mean ± std table"""

from pathlib import Path
from typing import List

from core.errors import DataError
from core.metrics import AggregateRow, aggregate_runs, group_reports, read_reports
from ui.display import Display
from utils.logger import get_logger

logger = get_logger()


class ReportService:
    def __init__(self, show_output: bool = True):
        self.show_output = show_output
        self.display = Display()

    def run(self, runs_path) -> List[AggregateRow]:
        runs_path = Path(runs_path)
        if not runs_path.exists():
            raise DataError("Run directory not found", context={'path': str(runs_path)})
        reports = read_reports(runs_path)
        if not reports:
            raise DataError("No run reports found", context={'path': str(runs_path)})
        rows = [aggregate_runs(group) for group in group_reports(reports)]
        for row in rows:
            logger.info(f"{row.label}: {row.runs} runs, accuracy {row.accuracy_text}%, "
                        f"time {row.time_text} min")
        if self.show_output:
            self.display.show_report(rows)
        return rows
