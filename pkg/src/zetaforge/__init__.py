"""Exact zetas of reductive groups and vector bundles over curves over finite fields."""

__version__ = "0.1.0"
