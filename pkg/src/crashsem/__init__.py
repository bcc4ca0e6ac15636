"""Causal inference on road-accident reports: block parsing, semantic literals,
temporal levels and norm-based default reasoning over stable models."""

__version__ = "0.1.0"
