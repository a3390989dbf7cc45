"""Desk-scale linear dynamics: weighted backward shifts, return-time sets and
arithmetic progressions of bounded common difference."""

__version__ = "0.1.0"
