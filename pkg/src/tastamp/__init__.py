"""Timestamps of timed automata with silent transitions."""

__version__ = "0.1.0"
