"""
Report generation for comparison results.
"""

from .report_generator import ReportGenerator

__all__ = ["ReportGenerator"]
