"""Utility helpers for configuration, seeding and shared error types."""
