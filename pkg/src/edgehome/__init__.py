"""Desk-scale smart-home assistant pipeline."""

__version__ = "0.1.0"
