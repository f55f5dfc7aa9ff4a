"""Experiment sub-command handlers."""
