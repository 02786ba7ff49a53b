"""
Services module: experiment pipeline and exporters
"""
from . import exporter, runner

__all__ = ["exporter", "runner"]
