"""Sublevel-set topology of grid-sampled random fields."""

__version__ = "0.1.0"
