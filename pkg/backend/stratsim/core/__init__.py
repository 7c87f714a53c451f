"""Domain Package."""
