"""Painting-space features, discriminant projection and style-trajectory indices."""

from .features import FEATURE_NAMES, N_FEATURES

__version__ = "0.1.0"
__all__ = ["FEATURE_NAMES", "N_FEATURES", "__version__"]
