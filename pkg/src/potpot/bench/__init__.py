"""Experiment harness, file formats and the command line."""

from ..separators import OneVsAll, OneVsOne, classify_multiclass
from .data_io import CsvFormatError, export_surface, load_csv, write_csv
from .experiment import ErrorTable, ExperimentSpec, load_spec, parse_spec_text, run_experiment

__all__ = [
    "CsvFormatError", "ErrorTable", "ExperimentSpec", "OneVsAll", "OneVsOne", "classify_multiclass",
    "export_surface", "load_csv", "load_spec", "parse_spec_text", "run_experiment", "write_csv",
]
