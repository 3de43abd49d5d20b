"""Transition planning for a coal-dominated power system: fleet retirement,
hourly dispatch with firm generation, build scheduling and cost comparison."""

__version__ = "0.1.0"
