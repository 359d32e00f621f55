"""Standalone sweeps over the qig package."""
