"""Jamming detection by pseudo-random resource blanking in OFDM."""

__version__ = "0.1.0"
