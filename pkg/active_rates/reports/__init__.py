"""Report writers."""

from __future__ import annotations

from .generator import CSV_COLUMNS, ReportGenerator, emit_report

__all__ = ["CSV_COLUMNS", "ReportGenerator", "emit_report"]
