"""Local connection-probability estimation on random graphs."""

__version__ = "0.1.0"
