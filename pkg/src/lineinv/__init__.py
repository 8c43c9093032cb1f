"""Bound-state surgery and transmission-only inverse scattering on the line."""
