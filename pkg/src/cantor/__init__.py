"""Exact arithmetic for digit-indexed infinite products and generalized Thue-Morse words."""

__version__ = "0.1.0"
