"""Simulation and analysis toolkit for on-demand public transit services."""

__version__ = "0.1.0"
