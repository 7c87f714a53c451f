"""Service Layer Package."""
