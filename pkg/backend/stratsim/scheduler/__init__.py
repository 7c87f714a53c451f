"""Scheduler Package."""
