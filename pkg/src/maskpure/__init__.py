"""Randomized mask-fill-vote purification and certification for text classifiers."""
__version__ = "0.1.0"
