"""Maintenance scripts for the eseries package."""
