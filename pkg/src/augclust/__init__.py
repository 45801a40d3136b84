"""Clustering objectives with data augmentation, smoothing and graduated descent."""

__version__ = "0.1.0"
