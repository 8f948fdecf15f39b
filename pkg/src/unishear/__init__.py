"""Discrete universal shearlet frames and l1-analysis inpainting of line singularities."""

__version__ = "0.1.0"
