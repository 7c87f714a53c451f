"""Handlers Package."""
