"""Commuting involution graphs of GL_n over finite fields."""

__version__ = "0.1.0"
