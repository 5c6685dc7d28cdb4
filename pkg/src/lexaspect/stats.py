"""Corpus statistics: verb coverage, aspect distributions, chi-square, kappa."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

import numpy as np

from .corpus import CANONICAL_ORDER, AspectLabel, Corpus
from .errors import (
    DegenerateAgreement,
    DegenerateTable,
    EmptyCorpus,
    EmptyTable,
    LengthMismatch,
)

# Lentz continued fraction settings
_CF_EPS = 1e-14
_CF_MAX_ITERS = 500
_FPMIN = 1e-300


@dataclass(frozen=True)
class FrequencyTable:
    entries: Mapping[str, int]

    def __post_init__(self):
        if any(c < 0 for c in self.entries.values()):
            raise ValueError("counts must be nonnegative")

    @property
    def total(self) -> int:
        return sum(self.entries.values())

    @classmethod
    def from_items(cls, items) -> "FrequencyTable":
        return cls(dict(Counter(items)))

    def ranked(self) -> list[tuple[str, int]]:
        """Categories by descending count; ties broken lexicographically."""
        return sorted(self.entries.items(), key=lambda kv: (-kv[1], kv[0]))


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    df: int
    p_value: float

    def to_json(self) -> dict:
        return {"statistic": self.statistic, "df": self.df, "p_value": self.p_value}


@dataclass(frozen=True)
class KappaResult:
    kappa: float
    observed_agreement: float
    expected_agreement: float
    n: int

    def to_json(self) -> dict:
        return {
            "kappa": self.kappa,
            "observed_agreement": self.observed_agreement,
            "expected_agreement": self.expected_agreement,
            "n": self.n,
        }


def top_k_coverage(freq: FrequencyTable, k: int) -> float:
    """Share of all occurrences taken by the ``k`` most frequent categories."""
    if k < 1:
        raise ValueError("k must be positive")
    total = freq.total
    if total == 0:
        raise EmptyTable("frequency table is empty")
    ranked = freq.ranked()
    if k >= len(ranked):
        return 1.0
    return sum(c for _, c in ranked[:k]) / total


def verb_frequencies(corpus: Corpus) -> FrequencyTable:
    """Counts of ``verb_lemma`` values; utterances without one are skipped."""
    return FrequencyTable.from_items(u.verb_lemma for u in corpus if u.verb_lemma is not None)


def label_counts(corpus: Corpus) -> dict[AspectLabel, int]:
    counts = Counter(u.label for u in corpus)
    return {lab: counts.get(lab, 0) for lab in CANONICAL_ORDER}


def aspect_distribution(corpus: Corpus) -> dict[AspectLabel, float]:
    n = len(corpus)
    if n == 0:
        raise EmptyCorpus("cannot compute a distribution over an empty corpus")
    return {lab: c / n for lab, c in label_counts(corpus).items()}


def mean_sentence_length(corpus: Corpus) -> float:
    if len(corpus) == 0:
        raise EmptyCorpus("cannot average lengths over an empty corpus")
    return math.fsum(len(u.tokens) for u in corpus) / len(corpus)


def _lower_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by its power series."""
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_CF_MAX_ITERS * 4):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _CF_EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _upper_continued_fraction(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x), modified Lentz."""
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _CF_MAX_ITERS + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def chi_square_sf(x: float, df: int) -> float:
    """Upper tail of the chi-square distribution, Q(df/2, x/2).

    Uses the series for ``x < df + 1`` and the continued fraction otherwise.
    Results that underflow are clamped to the smallest positive double so
    the value stays in (0, 1].
    """
    if df < 1:
        raise ValueError("df must be a positive integer")
    if x < 0 or math.isnan(x):
        raise ValueError("x must be nonnegative")
    a = df / 2.0
    half = x / 2.0
    if half == 0.0:
        return 1.0
    if x < df + 1:
        q = 1.0 - _lower_series(a, half)
    else:
        q = _upper_continued_fraction(a, half)
    return min(1.0, max(q, math.ulp(0.0)))


def chi_square_homogeneity(observed: Sequence[Sequence[int]]) -> ChiSquareResult:
    """Pearson chi-square on a samples x categories table (no continuity correction)."""
    table = np.asarray(observed, dtype=float)
    if table.ndim != 2 or table.shape[0] < 2 or table.shape[1] < 2:
        raise DegenerateTable("need at least a 2x2 table")
    if (table < 0).any():
        raise ValueError("counts must be nonnegative")
    rows = table.sum(axis=1)
    cols = table.sum(axis=0)
    if (rows == 0).any() or (cols == 0).any():
        raise DegenerateTable("every row and column total must be positive")
    expected = np.outer(rows, cols) / table.sum()
    statistic = float(((table - expected) ** 2 / expected).sum())
    df = (table.shape[0] - 1) * (table.shape[1] - 1)
    return ChiSquareResult(statistic, df, chi_square_sf(statistic, df))


def cohen_kappa(labels_a: Sequence[Hashable], labels_b: Sequence[Hashable]) -> KappaResult:
    """Unweighted Cohen's kappa for two annotators over the same items.

    Agreement terms are accumulated as exact fractions and rounded once.
    """
    n = len(labels_a)
    if n != len(labels_b):
        raise LengthMismatch(f"{n} vs {len(labels_b)} labels")
    if n == 0:
        raise LengthMismatch("no items to compare")
    po = Fraction(sum(a == b for a, b in zip(labels_a, labels_b)), n)
    ca, cb = Counter(labels_a), Counter(labels_b)
    pe = sum((Fraction(ca[c], n) * Fraction(cb[c], n) for c in ca.keys() & cb.keys()), Fraction(0))
    if pe == 1:
        raise DegenerateAgreement("expected agreement is 1; kappa is undefined")
    kappa = (po - pe) / (1 - pe)
    return KappaResult(float(kappa), float(po), float(pe), n)
