"""Numerical services for the broker toolkit."""
