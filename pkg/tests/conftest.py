import json

import numpy as np
import pytest

from lexaspect.corpus import AspectLabel, Domain
from lexaspect.embeddings import EmbeddedInstance


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows), encoding="utf-8")
    return path


def row(id_, label, language="de", domain="captions", tokens=("a",), **extra):
    return {"id": id_, "language": language, "domain": domain, "tokens": list(tokens), "label": label, **extra}


def instance(id_, vector, label, language="de", domain=Domain.CAPTIONS):
    return EmbeddedInstance(id_, np.asarray(vector, dtype=float), AspectLabel(label), language, domain)


def blobs(n=40, sigma=0.1, seed=0, dim=2, language="de"):
    """Two classes centred at +e1 (state) and -e1 (atelic)."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        state = i % 2 == 0
        v = rng.normal(0.0, sigma, dim)
        v[0] += 1.0 if state else -1.0
        out.append(instance(f"{language}-{i:03d}", v, "state" if state else "atelic", language))
    return out


@pytest.fixture
def tmp_jsonl(tmp_path):
    def make(rows, name="corpus.jsonl"):
        return write_jsonl(tmp_path / name, rows)
    return make
