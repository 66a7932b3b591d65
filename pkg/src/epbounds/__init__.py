"""Explicit bounds for pi(x) and theta(x), checked against sieve data."""

__version__ = "0.1.0"
