"""Simulator and analysis toolkit for hub/path fair-ordering BFT routing."""

__version__ = "0.1.0"
