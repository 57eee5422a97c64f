"""Metastable transition layers for the Allen-Cahn equation with phase-dependent diffusivity."""
__version__ = "0.1.0"
