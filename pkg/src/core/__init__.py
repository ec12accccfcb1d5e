"""Discrete-event kernel: calendar, run loop, errors and the command-line runner."""
