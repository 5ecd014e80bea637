"""Unambiguous discrimination games, divergences and bounds."""
