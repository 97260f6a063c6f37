"""drillstream: synthetic social-media stimulus engine for functional exercises."""

__version__ = "0.1.0"
