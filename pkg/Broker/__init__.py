"""Broker spectrum reservation toolkit."""
