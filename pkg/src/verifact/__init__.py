"""Tool-augmented factuality checking for generative model outputs."""

__version__ = "0.1.0"
