"""Locally private confidence sequences, intervals, and anytime-valid tests."""

__version__ = "0.1.0"
