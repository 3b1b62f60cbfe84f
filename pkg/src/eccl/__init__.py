"""Exploration checkpoint coverage laboratory: household text worlds, coverage
scoring, group-relative policy training and explore-then-act evaluation."""

__version__ = "0.1.0"
