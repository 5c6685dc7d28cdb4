import tempfile
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from conftest import row
from lexaspect.corpus import (
    DEFAULT_DROP_POLICY,
    AspectLabel,
    Corpus,
    AnnotatedUtterance,
    Domain,
    apply_class_drop,
    dumps_corpus,
    filter_corpus,
    load_corpus,
    parse_drop_policy,
    save_corpus,
)
from lexaspect.errors import DuplicateId, EmptyTokens, MalformedLine, UnknownLabel


def test_load_keeps_file_order(tmp_jsonl):
    path = tmp_jsonl([row("b2", "state"), row("a1", "telic", language="fa")])
    corpus = load_corpus(path)
    assert [u.id for u in corpus] == ["b2", "a1"]
    assert corpus.utterances[1].label is AspectLabel.TELIC
    assert corpus.provenance == str(path)


def test_example_line_from_the_format_docs(tmp_path):
    line = ('{"id":"ar-cap-0001","language":"ar","domain":"captions",'
            '"tokens":["رجل","يمشي"],"label":"atelic","verb_lemma":"مشى"}\n')
    path = tmp_path / "ar.jsonl"
    path.write_text(line, encoding="utf-8")
    (utt,) = load_corpus(path)
    assert utt.tokens == ("رجل", "يمشي")
    assert utt.verb_lemma == "مشى"
    assert utt.domain is Domain.CAPTIONS


def test_label_with_trailing_space_is_rejected(tmp_jsonl):
    with pytest.raises(UnknownLabel):
        load_corpus(tmp_jsonl([row("c1", "telic ")]))


@pytest.mark.parametrize("bad", ["Telic", "STATE", "stative", ""])
def test_labels_are_case_sensitive(tmp_jsonl, bad):
    with pytest.raises(UnknownLabel):
        load_corpus(tmp_jsonl([row("c1", bad)]))


def test_duplicate_ids(tmp_jsonl):
    with pytest.raises(DuplicateId) as err:
        load_corpus(tmp_jsonl([row("c1", "state"), row("c1", "atelic")]))
    assert err.value.id == "c1"


def test_empty_tokens(tmp_jsonl):
    with pytest.raises(EmptyTokens):
        load_corpus(tmp_jsonl([row("c1", "state", tokens=())]))


def test_missing_required_key_reports_line(tmp_jsonl):
    bad = row("c2", "state")
    del bad["domain"]
    with pytest.raises(MalformedLine) as err:
        load_corpus(tmp_jsonl([row("c1", "state"), bad]))
    assert err.value.line == 2


def test_invalid_json(tmp_path):
    path = tmp_path / "x.jsonl"
    path.write_text('{"id": "a"\n', encoding="utf-8")
    with pytest.raises(MalformedLine):
        load_corpus(path)


@pytest.mark.parametrize("lang", ["DE", "deu", "", 7])
def test_language_must_be_iso_code(tmp_jsonl, lang):
    with pytest.raises(MalformedLine):
        load_corpus(tmp_jsonl([row("c1", "state", language=lang)]))


def test_unknown_keys_ignored(tmp_jsonl):
    (utt,) = load_corpus(tmp_jsonl([row("c1", "state", image_id=17, tense="present")]))
    assert utt.tense == "present"


def _mixed():
    rows = [
        row("d1", "state"), row("f1", "atelic", language="fa"), row("d2", "telic"),
        row("f2", "state", language="fa"), row("d3", "atelic"),
    ]
    return Corpus(tuple(AnnotatedUtterance(r["id"], r["language"], Domain(r["domain"]),
                                           tuple(r["tokens"]), AspectLabel(r["label"])) for r in rows))


def test_filter_language():
    out = filter_corpus(_mixed(), language="de")
    assert [u.id for u in out] == ["d1", "d2", "d3"]


def test_filter_labels():
    out = filter_corpus(_mixed(), labels={AspectLabel.STATE})
    assert [u.id for u in out] == ["d1", "f2"]


def test_filter_without_criteria_is_identity():
    c = _mixed()
    assert filter_corpus(c) == c


def _caption_corpus(counts, domain=Domain.CAPTIONS):
    utts = []
    i = 0
    for label, n in counts.items():
        for _ in range(n):
            utts.append(AnnotatedUtterance(f"u{i}", "de", domain, ("x",), label))
            i += 1
    return Corpus(tuple(utts))


def test_class_drop_captions_default():
    c = _caption_corpus({AspectLabel.STATE: 5, AspectLabel.ATELIC: 5, AspectLabel.TELIC: 2})
    out = apply_class_drop(c, DEFAULT_DROP_POLICY)
    assert len(out) == 10
    assert {u.label for u in out} == {AspectLabel.STATE, AspectLabel.ATELIC}


def test_class_drop_wikipedia_default():
    c = _caption_corpus({AspectLabel.STATE: 4, AspectLabel.TELIC: 4, AspectLabel.ATELIC: 1}, Domain.WIKIPEDIA)
    out = apply_class_drop(c, DEFAULT_DROP_POLICY)
    assert len(out) == 8
    assert AspectLabel.ATELIC not in {u.label for u in out}


def test_class_drop_empty_policy_is_identity():
    c = _caption_corpus({AspectLabel.STATE: 2, AspectLabel.TELIC: 1})
    assert apply_class_drop(c, {}) == c


def test_parse_drop_policy():
    assert parse_drop_policy("default") == DEFAULT_DROP_POLICY
    assert parse_drop_policy("none") == {}
    assert parse_drop_policy("wikipedia=telic") == {Domain.WIKIPEDIA: AspectLabel.TELIC}
    with pytest.raises(ValueError):
        parse_drop_policy("captions=telic,captions=state")


# --- properties ------------------------------------------------------------

labels = st.sampled_from(list(AspectLabel))
domains = st.sampled_from(list(Domain))
langs = st.sampled_from(["ar", "de", "fa", "zh"])
token = st.text(min_size=1, max_size=6).filter(lambda t: t.strip() == t and t)


@st.composite
def corpora(draw):
    n = draw(st.integers(0, 25))
    utts = []
    for i in range(n):
        utts.append(AnnotatedUtterance(
            f"id{i}", draw(langs), draw(domains), tuple(draw(st.lists(token, min_size=1, max_size=4))),
            draw(labels), verb_lemma=draw(st.none() | token),
        ))
    return Corpus(tuple(utts))


@given(corpora())
def test_round_trip(corpus):
    with tempfile.TemporaryDirectory() as d:
        path = Path(d) / "c.jsonl"
        save_corpus(corpus, path)
        again = load_corpus(path)
    assert again.utterances == corpus.utterances
    assert dumps_corpus(again) == dumps_corpus(corpus)


@given(corpora(), st.none() | langs, st.none() | domains, st.none() | st.sets(labels))
def test_filter_idempotent_and_commuting(corpus, lang, dom, labs):
    once = filter_corpus(corpus, lang, dom, labs)
    assert filter_corpus(once, lang, dom, labs) == once
    stepwise = filter_corpus(filter_corpus(filter_corpus(corpus, labels=labs), domain=dom), language=lang)
    assert stepwise == once


@given(corpora())
def test_class_drop_preserves_order_and_count(corpus):
    out = apply_class_drop(corpus, DEFAULT_DROP_POLICY)
    dropped = sum(1 for u in corpus if DEFAULT_DROP_POLICY[u.domain] is u.label)
    assert len(out) == len(corpus) - dropped
    ids = [u.id for u in corpus]
    positions = [ids.index(u.id) for u in out]
    assert positions == sorted(positions)
