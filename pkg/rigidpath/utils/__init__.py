"""
Utilities package for rigidpath
"""

from rigidpath.utils.overlay import export_overlay, render_frame
from rigidpath.utils.report_formatter import format_run_summary, format_scenarios

__all__ = ['export_overlay', 'render_frame', 'format_run_summary', 'format_scenarios']
