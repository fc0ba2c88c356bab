"""Exact construction and verification of faithful tropicalizations of Mumford-curve skeleta."""

__version__ = "0.1.0"
