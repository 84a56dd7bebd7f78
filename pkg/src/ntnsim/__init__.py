"""Desk-scale simulator of NB-IoT over bent-pipe GEO/LEO satellite links."""

__version__ = "0.1.0"
