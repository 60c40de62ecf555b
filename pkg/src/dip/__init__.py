"""Area-of-interest detection from 2D pointing gestures."""

__version__ = "0.1.0"
