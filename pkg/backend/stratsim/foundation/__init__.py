"""Foundation package."""
