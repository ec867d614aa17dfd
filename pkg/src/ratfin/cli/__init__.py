"""Experiment command line: config parsing, runners and table output."""
