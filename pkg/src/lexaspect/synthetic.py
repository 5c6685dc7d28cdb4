"""Synthetic multilingual corpora living in one shared vector space.

Every language draws its vectors from the same two class-conditional
Gaussians: ``+e1`` for stative items, ``-e1`` for the non-stative class,
each with isotropic noise ``sigma``. Classes are therefore linearly
separable across languages by construction, which is what the end-to-end
checks lean on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import DEFAULT_DROP_POLICY, AnnotatedUtterance, AspectLabel, Corpus, Domain
from .embeddings import SentenceVectorTable, VectorTable
from .rng import SplitMix64

DEFAULT_LANGUAGES = ("ar", "zh", "fa", "de", "ru", "tr")

# the class that survives the default drop policy in each domain
NONSTATE_LABEL = {
    Domain.CAPTIONS: AspectLabel.ATELIC,
    Domain.WIKIPEDIA: AspectLabel.TELIC,
}
assert all(NONSTATE_LABEL[d] is not DEFAULT_DROP_POLICY[d] for d in Domain)


@dataclass(frozen=True)
class SyntheticData:
    corpus: Corpus
    sentence_vectors: SentenceVectorTable
    word_vectors: VectorTable


def generate(
    languages=DEFAULT_LANGUAGES,
    per_language: int = 100,
    dim: int = 16,
    sigma: float = 0.1,
    seed: int = 42,
    domain: Domain = Domain.CAPTIONS,
) -> SyntheticData:
    """Alternate state / non-state items per language (even index = state).

    Draw order: languages as given, items in index order, vector components
    in order, one ``gauss()`` per component, all from a single stream.
    Each utterance has one token, ``<id>-w``, whose word vector equals the
    sentence vector, so mean pooling and lookup give identical inputs.
    """
    if dim < 2:
        raise ValueError("dim must be at least 2")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if per_language < 1:
        raise ValueError("per_language must be positive")
    domain = Domain(domain)
    rng = SplitMix64(seed)
    utterances = []
    sentence_vecs = {}
    word_vecs = {}
    for lang in languages:
        for i in range(per_language):
            is_state = i % 2 == 0
            label = AspectLabel.STATE if is_state else NONSTATE_LABEL[domain]
            vec = np.array([sigma * rng.gauss() for _ in range(dim)])
            vec[0] += 1.0 if is_state else -1.0
            uid = f"{lang}-{domain.value[:3]}-{i:04d}"
            token = f"{uid}-w"
            utterances.append(AnnotatedUtterance(uid, lang, domain, (token,), label))
            sentence_vecs[uid] = vec
            word_vecs[token] = vec
    return SyntheticData(
        Corpus(tuple(utterances), "synthetic"),
        SentenceVectorTable(dim, sentence_vecs),
        VectorTable(dim, word_vecs),
    )
