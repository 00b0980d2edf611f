"""Exact computations with quadratic algebras and the genus-zero moduli cooperad."""

__version__ = "0.1.0"
