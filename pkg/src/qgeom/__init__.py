"""Projective differential geometry of quartic surfaces."""
