"""HTTP service wrapping the core toolkit."""
