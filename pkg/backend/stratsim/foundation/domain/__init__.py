"""Common Domain Package."""
