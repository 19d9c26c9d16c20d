"""adetag: adverse drug event extraction toolkit.

Span <-> IOB conversion, WordPiece tokenization with label propagation,
linear-chain CRF tagging, entity-level strict/partial evaluation and
model-comparison statistics.
"""

__version__ = "0.1.0"
