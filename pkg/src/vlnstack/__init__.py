"""Hierarchical vision-and-language navigation decision stack."""

__version__ = "0.1.0"
