"""
Utility helpers for the sepflux package: logging setup and the optional
results-store database layer.
"""
