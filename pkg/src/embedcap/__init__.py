"""Multi-user information embedding: rate regions and random-coding simulation."""

__version__ = "0.1.0"
