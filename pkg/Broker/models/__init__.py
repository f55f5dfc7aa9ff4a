"""Pydantic models for the broker toolkit."""
