"""Command-line entrypoint package."""
