"""Positive-word navigation in finite quotients by a power-based Solovay-Kitaev recursion."""

__version__ = "0.1.0"
