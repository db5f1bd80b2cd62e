"""Attribute claims to web evidence, revise what the evidence contradicts,
and synthesize editor-training data by prompted corruption of grounded
summaries."""

__version__ = "0.1.0"
