"""Scenario configuration, scans, output and the command-line interface."""

from .config import Scenario, ScanSpec, dump, load_config, load_preset, loads, normalize, preset_names, preset_text
from .output import write_output
from .scan import ScanResult, run_scan

__all__ = ["Scenario", "ScanSpec", "ScanResult", "dump", "load_config", "load_preset", "loads", "normalize",
           "preset_names", "preset_text", "run_scan", "write_output"]
