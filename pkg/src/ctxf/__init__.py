"""Exact tools for contextuality of Mermin-type scenarios over finite abelian groups."""

__version__ = "0.1.0"
