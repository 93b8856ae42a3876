"""Cloth-in-wind parameter measurement: simulate, render, embed, refine."""

__version__ = "0.1.0"
