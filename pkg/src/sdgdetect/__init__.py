"""sdgdetect: detect, evaluate, and ensemble SDG labeling systems over text."""

__version__ = "0.1.0"
