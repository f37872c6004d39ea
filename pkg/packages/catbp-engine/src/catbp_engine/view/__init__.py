# CLI view: human-readable summaries on stderr

from .rich_view import DEFAULT_PALETTE, Palette, ReportView

__all__ = ["DEFAULT_PALETTE", "Palette", "ReportView"]
