"""Scenario configuration models and result records."""
