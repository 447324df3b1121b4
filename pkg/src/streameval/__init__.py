"""Standardized evaluation of online learners, drift detectors and feature
selectors on evolving data streams."""

__version__ = "0.1.0"
