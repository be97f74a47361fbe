"""Polynomial mappings from the unit disk/ball onto star-like and convex regions."""
