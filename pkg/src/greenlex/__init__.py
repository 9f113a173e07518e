"""Toolkit for dictionary-based green patent classification, text novelty
scoring, and firm-level treatment effect estimation."""

__version__ = "0.1.0"
