"""Lexical aspect prediction from distributional sentence representations.

Mono-lingual cross-validation, zero-shot cross-lingual transfer and
coalition-based language attribution on top of a small from-scratch
softmax regression, plus the corpus statistics that go with them.
"""

__version__ = "0.1.0"
