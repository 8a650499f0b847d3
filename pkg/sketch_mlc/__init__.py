"""Sketch-and-solve multi-label classification toolkit."""

__version__ = "1.0.0"
