"""Tests for the event calendar, engine and CLI runner."""
