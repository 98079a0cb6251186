"""Similarity-based random survival forest toolkit."""

__version__ = "1.0.0"
