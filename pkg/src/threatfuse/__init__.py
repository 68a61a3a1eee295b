"""Confidence fusion for shared cyber threat reports."""

__version__ = "0.1.0"
