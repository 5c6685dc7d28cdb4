"""Annotated corpora: JSONL loading, filtering and the class-drop protocol."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import DuplicateId, EmptyTokens, MalformedLine, UnknownLabel


class AspectLabel(str, Enum):
    STATE = "state"
    TELIC = "telic"
    ATELIC = "atelic"

    @property
    def index(self) -> int:
        return CANONICAL_ORDER.index(self)


CANONICAL_ORDER = (AspectLabel.STATE, AspectLabel.TELIC, AspectLabel.ATELIC)


class Domain(str, Enum):
    CAPTIONS = "captions"
    WIKIPEDIA = "wikipedia"


DEFAULT_DROP_POLICY: dict[Domain, AspectLabel] = {
    Domain.CAPTIONS: AspectLabel.TELIC,
    Domain.WIKIPEDIA: AspectLabel.ATELIC,
}

REQUIRED_KEYS = ("id", "language", "domain", "tokens", "label")
OPTIONAL_KEYS = ("annotator", "verb_lemma", "tense", "gram_aspect")

_LANG_RE = re.compile(r"^[a-z]{2}$")


def canonical_labels(labels: Iterable[AspectLabel]) -> list[AspectLabel]:
    """Distinct labels in state < telic < atelic order."""
    present = set(labels)
    return [lab for lab in CANONICAL_ORDER if lab in present]


def parse_label(value) -> AspectLabel:
    try:
        return AspectLabel(value)
    except ValueError:
        raise UnknownLabel(value) from None


@dataclass(frozen=True)
class AnnotatedUtterance:
    id: str
    language: str
    domain: Domain
    tokens: tuple[str, ...]
    label: AspectLabel
    annotator: str | None = None
    verb_lemma: str | None = None
    tense: str | None = None
    gram_aspect: str | None = None

    def to_json(self) -> dict:
        out = {
            "id": self.id,
            "language": self.language,
            "domain": self.domain.value,
            "tokens": list(self.tokens),
            "label": self.label.value,
        }
        for key in OPTIONAL_KEYS:
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out


@dataclass(frozen=True)
class Corpus:
    utterances: tuple[AnnotatedUtterance, ...]
    provenance: str = ""

    def __len__(self) -> int:
        return len(self.utterances)

    def __iter__(self) -> Iterator[AnnotatedUtterance]:
        return iter(self.utterances)

    @property
    def labels(self) -> list[AspectLabel]:
        return [u.label for u in self.utterances]

    @property
    def languages(self) -> list[str]:
        """Languages in order of first appearance."""
        return list(dict.fromkeys(u.language for u in self.utterances))


def utterance_from_json(obj, line: int) -> AnnotatedUtterance:
    if not isinstance(obj, dict):
        raise MalformedLine(line, "expected a JSON object")
    missing = [k for k in REQUIRED_KEYS if k not in obj]
    if missing:
        raise MalformedLine(line, f"missing required key(s): {', '.join(missing)}")

    uid = obj["id"]
    if not isinstance(uid, str) or not uid:
        raise MalformedLine(line, "'id' must be a nonempty string")
    lang = obj["language"]
    if not isinstance(lang, str) or not _LANG_RE.match(lang):
        raise MalformedLine(line, f"'language' must be a lowercase ISO-639-1 code, got {lang!r}")
    try:
        domain = Domain(obj["domain"])
    except ValueError:
        raise MalformedLine(line, f"unknown domain {obj['domain']!r}") from None

    tokens = obj["tokens"]
    if not isinstance(tokens, list):
        raise MalformedLine(line, "'tokens' must be a list")
    if not tokens:
        raise EmptyTokens(uid)
    if not all(isinstance(t, str) and t for t in tokens):
        raise MalformedLine(line, "'tokens' entries must be nonempty strings")

    label = parse_label(obj["label"])

    extras = {}
    for key in OPTIONAL_KEYS:
        value = obj.get(key)
        if value is not None and not isinstance(value, str):
            raise MalformedLine(line, f"{key!r} must be a string")
        extras[key] = value
    return AnnotatedUtterance(uid, lang, domain, tuple(tokens), label, **extras)


def load_corpus(path) -> Corpus:
    """Read a JSONL corpus, one utterance per line, keeping file order.

    Blank lines are skipped. Unknown keys are ignored; missing required
    keys, unknown labels, empty token lists and duplicate ids raise.
    """
    path = Path(path)
    utterances = []
    seen = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise MalformedLine(lineno, f"invalid JSON ({exc.msg})") from None
            utt = utterance_from_json(obj, lineno)
            if utt.id in seen:
                raise DuplicateId(utt.id)
            seen.add(utt.id)
            utterances.append(utt)
    return Corpus(tuple(utterances), str(path))


def dumps_corpus(corpus: Corpus) -> str:
    return "".join(
        json.dumps(u.to_json(), ensure_ascii=False, separators=(",", ":")) + "\n"
        for u in corpus
    )


def save_corpus(corpus: Corpus, path) -> None:
    Path(path).write_text(dumps_corpus(corpus), encoding="utf-8")


def filter_corpus(
    corpus: Corpus,
    language: str | None = None,
    domain: Domain | str | None = None,
    labels: Iterable[AspectLabel] | None = None,
) -> Corpus:
    domain = Domain(domain) if domain is not None else None
    label_set = frozenset(labels) if labels is not None else None
    kept = tuple(
        u for u in corpus
        if (language is None or u.language == language)
        and (domain is None or u.domain == domain)
        and (label_set is None or u.label in label_set)
    )
    return replace(corpus, utterances=kept)


def apply_class_drop(corpus: Corpus, policy: Mapping[Domain, AspectLabel]) -> Corpus:
    """Remove every utterance whose (domain, label) pair is named in ``policy``."""
    if not policy:
        return corpus
    kept = tuple(u for u in corpus if policy.get(u.domain) is not u.label)
    return replace(corpus, utterances=kept)


def parse_drop_policy(text: str) -> dict[Domain, AspectLabel]:
    """``default``, ``none`` or an explicit ``captions=telic,wikipedia=atelic``."""
    text = text.strip()
    if text == "default":
        return dict(DEFAULT_DROP_POLICY)
    if text in ("none", ""):
        return {}
    policy: dict[Domain, AspectLabel] = {}
    for part in text.split(","):
        dom, sep, lab = part.partition("=")
        if not sep:
            raise ValueError(f"bad drop-policy entry {part!r}")
        domain = Domain(dom.strip())
        if domain in policy:
            raise ValueError(f"domain {domain.value!r} listed twice in drop policy")
        policy[domain] = parse_label(lab.strip())
    return policy


def policy_to_json(policy: Mapping[Domain, AspectLabel]) -> dict[str, str]:
    return {d.value: policy[d].value for d in Domain if d in policy}

