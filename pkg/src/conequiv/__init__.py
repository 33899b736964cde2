"""Cone-bilipschitz reduction of triangulable Lie groups and cone-map certifiers."""

__version__ = "0.1.0"
