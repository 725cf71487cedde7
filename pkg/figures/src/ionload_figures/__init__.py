"""Figures for ionload CSV outputs.

This package talks to the simulator only through its documented file
formats (schema-tagged CSVs and key = value fit reports); it imports
nothing from the simulator and recomputes no physics.
"""

from .render import FigureSpec, RenderResult, render

__all__ = ["FigureSpec", "RenderResult", "render"]
