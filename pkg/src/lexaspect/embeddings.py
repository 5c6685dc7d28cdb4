"""Word/sentence vector files and utterance representations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .corpus import AnnotatedUtterance, AspectLabel, Corpus, Domain
from .errors import (
    BadHeader,
    DimensionMismatch,
    DuplicateId,
    MissingUtteranceVector,
    UnparsableFloat,
)


@dataclass(frozen=True, eq=False)
class VectorTable:
    """Token -> vector map parsed from a ``<count> <dim>`` text file."""

    dim: int
    entries: Mapping[str, np.ndarray]
    duplicates: int = 0

    def __contains__(self, token: str) -> bool:
        return token in self.entries

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True, eq=False)
class SentenceVectorTable:
    """Utterance id -> precomputed sentence vector."""

    dim: int
    entries: Mapping[str, np.ndarray]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True, eq=False)
class EmbeddedInstance:
    id: str
    vector: np.ndarray = field(repr=False)
    label: AspectLabel
    language: str
    domain: Domain
    oov_fraction: float = 0.0


def _parse_floats(parts: list[str], lineno: int) -> np.ndarray:
    values = []
    for p in parts:
        try:
            v = float(p)
        except ValueError:
            raise UnparsableFloat(lineno, p) from None
        if not math.isfinite(v):
            raise UnparsableFloat(lineno, p)
        values.append(v)
    return np.array(values, dtype=np.float64)


def _positive_int(text: str) -> int:
    if not text.isdigit():
        raise ValueError(text)
    return int(text)


def parse_vector_file(path) -> VectorTable:
    """Parse the plain-text word vector format (fastText ``.vec`` style).

    Later occurrences of a token replace earlier ones; the number of
    replaced entries is kept in ``duplicates``.
    """
    entries: dict[str, np.ndarray] = {}
    duplicates = 0
    with Path(path).open(encoding="utf-8") as fh:
        header = fh.readline().split()
        try:
            if len(header) != 2:
                raise ValueError
            _count, dim = (_positive_int(h) for h in header)
            if dim < 1:
                raise ValueError
        except ValueError:
            raise BadHeader(f"expected '<count> <dim>' header, got {' '.join(header)!r}") from None

        for lineno, raw in enumerate(fh, start=2):
            line = raw.rstrip("\r\n").rstrip(" ")
            if not line:
                continue
            token, *rest = line.split(" ")
            if len(rest) != dim:
                raise DimensionMismatch(f"expected {dim} values, got {len(rest)}", lineno)
            if token in entries:
                duplicates += 1
            entries[token] = _parse_floats(rest, lineno)
    return VectorTable(dim, entries, duplicates)


def parse_sentence_vector_file(path) -> SentenceVectorTable:
    """Parse ``<dim>`` followed by ``<id>\\t<space-separated floats>`` lines."""
    entries: dict[str, np.ndarray] = {}
    with Path(path).open(encoding="utf-8") as fh:
        header = fh.readline().strip()
        try:
            dim = _positive_int(header)
            if dim < 1:
                raise ValueError
        except ValueError:
            raise BadHeader(f"expected '<dim>' header, got {header!r}") from None

        for lineno, raw in enumerate(fh, start=2):
            line = raw.rstrip("\r\n")
            if not line.strip():
                continue
            uid, sep, body = line.partition("\t")
            if not sep or not uid:
                raise DimensionMismatch("expected '<id>\\t<values>'", lineno)
            values = body.split()
            if len(values) != dim:
                raise DimensionMismatch(f"expected {dim} values, got {len(values)}", lineno)
            if uid in entries:
                raise DuplicateId(uid)
            entries[uid] = _parse_floats(values, lineno)
    return SentenceVectorTable(dim, entries)


def _fmt(vec: np.ndarray) -> str:
    return " ".join(repr(float(v)) for v in vec)


def dumps_vector_table(table: VectorTable) -> str:
    lines = [f"{len(table.entries)} {table.dim}"]
    lines += [f"{tok} {_fmt(vec)}" for tok, vec in table.entries.items()]
    return "\n".join(lines) + "\n"


def dumps_sentence_vectors(table: SentenceVectorTable) -> str:
    lines = [str(table.dim)]
    lines += [f"{uid}\t{_fmt(vec)}" for uid, vec in table.entries.items()]
    return "\n".join(lines) + "\n"


def embed_mean(utterance: AnnotatedUtterance, table: VectorTable) -> EmbeddedInstance:
    """Average the vectors of in-vocabulary tokens; OOV tokens are skipped.

    Component sums go through ``math.fsum`` so the result does not depend
    on token order. An all-OOV utterance gets the zero vector.
    """
    found = [table.entries[t] for t in utterance.tokens if t in table.entries]
    oov = 1.0 - len(found) / len(utterance.tokens)
    if found:
        stacked = np.stack(found)
        vector = np.array([math.fsum(col) for col in stacked.T]) / len(found)
    else:
        vector = np.zeros(table.dim)
    return EmbeddedInstance(
        utterance.id, vector, utterance.label, utterance.language, utterance.domain, oov
    )


def embed_lookup(utterance: AnnotatedUtterance, table: SentenceVectorTable) -> EmbeddedInstance:
    try:
        vector = table.entries[utterance.id]
    except KeyError:
        raise MissingUtteranceVector(utterance.id) from None
    return EmbeddedInstance(
        utterance.id, vector.copy(), utterance.label, utterance.language, utterance.domain, 0.0
    )


def l2_normalize(instance: EmbeddedInstance) -> EmbeddedInstance:
    norm = float(np.linalg.norm(instance.vector))
    if norm == 0.0:
        return instance
    return replace(instance, vector=instance.vector / norm)


def embed_corpus(
    corpus: Corpus | Iterable[AnnotatedUtterance],
    table: VectorTable | SentenceVectorTable,
    normalize: bool = False,
) -> list[EmbeddedInstance]:
    """Embed every utterance in order, by mean pooling or id lookup depending on the table."""
    embed = embed_mean if isinstance(table, VectorTable) else embed_lookup
    out = [embed(u, table) for u in corpus]
    if normalize:
        out = [l2_normalize(inst) for inst in out]
    return out
