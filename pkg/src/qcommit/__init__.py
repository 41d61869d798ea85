"""Desk-scale simulation of quantum commitment schemes and oracle experiments."""

__version__ = "0.1.0"
