"""Global VAR toolkit for weather-shock spillovers across U.S. states."""

__version__ = "0.1.0"
