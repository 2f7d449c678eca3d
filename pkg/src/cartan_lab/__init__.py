"""Computational toolkit for Cartan geometries modelled on parabolic geometries."""

__version__ = "0.1.0"
