"""Spectral numerics Package."""
