"""Causal fairness auditing toolkit for automated resume screeners."""

__version__ = "0.1.0"
