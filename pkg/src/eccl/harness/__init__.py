"""CLI, persistence, the agent wire protocol and report tables."""
from .evaluate import PolicySpec, evaluate
from .io import load_trajectory, parse_trajectory, persist_trajectory, read_config, write_json
from .report import ReportRow, build_report, write_report
from .wire import ExternalPolicy, WireJob, WireSession, serve_wire_protocol

__all__ = [
    "ExternalPolicy", "PolicySpec", "ReportRow", "WireJob", "WireSession", "build_report", "evaluate",
    "load_trajectory", "parse_trajectory", "persist_trajectory", "read_config", "serve_wire_protocol",
    "write_json", "write_report",
]
