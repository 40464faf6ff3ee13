"""Dispatcher synthesis, multivariant linking and path counting."""

from .dispatcher import DispatcherSpec, dispatcher_name, synthesize_dispatcher
from .dot import export_dot
from .link import LinkError, link_multivariant
from .paths import PathCount, count_paths, path_report, path_report_json

__all__ = [
    "DispatcherSpec", "dispatcher_name", "synthesize_dispatcher", "export_dot", "LinkError",
    "link_multivariant", "PathCount", "count_paths", "path_report", "path_report_json",
]
