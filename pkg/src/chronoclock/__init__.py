"""Discrete system-clock history states and their system-time entanglement."""

__version__ = "0.1.0"
