"""Corpus tooling for ShARC-style conversational QA datasets."""

__version__ = "0.1.0"
