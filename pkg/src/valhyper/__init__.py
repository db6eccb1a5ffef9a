"""Valued hyperfields over lexicographic value groups: quotients, towers,
RV-sorts and Hahn-series reconstruction."""
__version__ = "0.1.0"
