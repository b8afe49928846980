"""Derivative-based parsing for visibly pushdown grammars."""

__version__ = "0.1.0"
