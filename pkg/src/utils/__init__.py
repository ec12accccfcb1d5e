"""Logging, run metrics and schedulability analysis."""
