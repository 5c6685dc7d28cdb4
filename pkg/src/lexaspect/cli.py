"""Command-line entry point: ``lexaspect <subcommand> [flags]``.

Every subcommand prints one JSON report (``manifest``, ``experiment``,
``metrics``/``stats``/``attribution``, ``warnings``) to stdout, or to
``--out``. Failures exit nonzero with a single JSON line on stderr.
Flag values may also come from ``--config FILE`` (``key = value`` lines,
``#`` comments); explicit flags win over the file, the file over defaults.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
import warnings
from collections import Counter
from pathlib import Path

from . import __version__
from .classifier import TrainConfig
from .corpus import (
    CANONICAL_ORDER,
    Corpus,
    Domain,
    apply_class_drop,
    filter_corpus,
    load_corpus,
    parse_drop_policy,
    policy_to_json,
    save_corpus,
)
from .embeddings import (
    dumps_sentence_vectors,
    dumps_vector_table,
    embed_corpus,
    parse_sentence_vector_file,
    parse_vector_file,
)
from .errors import ConfigError, EmptyCorpus, IdSetMismatch, LexAspectError, MixedDimensions
from .evaluation import (
    METRICS,
    cross_validate,
    cross_validate_baseline,
    language_attribution,
    zero_shot_baseline,
    zero_shot_eval,
)
from .report import dumps_report, make_manifest, sha256_file
from .stats import (
    aspect_distribution,
    chi_square_homogeneity,
    cohen_kappa,
    label_counts,
    mean_sentence_length,
    top_k_coverage,
    verb_frequencies,
)
from .synthetic import DEFAULT_LANGUAGES, generate


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ------------------------------------------------------------------ parser


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.replace(";", ",").split(",") if x.strip()]


def _str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    # Parents are rebuilt per subcommand: argparse shares action objects with
    # children, so a per-subcommand set_defaults would otherwise leak.
    def common():
        p = _Parser(add_help=False)
        p.add_argument("--config", help="key = value file supplying flag defaults")
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--pretty", action="store_true", help="also render a human-readable table")
        p.add_argument("--threads", type=int, default=1)
        return p

    def data():
        p = _Parser(add_help=False)
        p.add_argument("--corpus", help="JSONL corpus")
        p.add_argument("--language", help="restrict to one language")
        p.add_argument("--domain", choices=[d.value for d in Domain])
        p.add_argument("--drop-policy", default="default",
                       help="default | none | captions=telic,wikipedia=atelic")
        return p

    def vectors():
        p = _Parser(add_help=False)
        p.add_argument("--vectors", action="append", default=[],
                       help="vector file, or LANG=PATH for a per-language table (repeatable)")
        p.add_argument("--mode", choices=["mean", "lookup"], default="mean")
        p.add_argument("--normalize", action="store_true", help="L2-normalize utterance vectors")
        return p

    def training():
        p = _Parser(add_help=False)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--l2", type=float, default=TrainConfig.l2_lambda)
        p.add_argument("--max-iters", type=int, default=TrainConfig.max_iters)
        p.add_argument("--grad-tol", type=float, default=TrainConfig.grad_tol)
        return p

    parser = _Parser(prog="lexaspect", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lexaspect {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    subs = {}

    p = sub.add_parser("stats", parents=[common(), data()], help="coverage, distributions, lengths, chi-square")
    p.add_argument("--second-corpus")
    p.add_argument("--k-list", type=_int_list, default=[10, 30, 100])
    p.set_defaults(drop_policy="none")
    subs["stats"] = p

    p = sub.add_parser("kappa", parents=[common()], help="Cohen's kappa between two annotation files")
    p.add_argument("--corpus")
    p.add_argument("--second-corpus")
    subs["kappa"] = p

    p = sub.add_parser("chisq", parents=[common()], help="chi-square homogeneity test")
    p.add_argument("--table", help="rows separated by ';', counts by ',' e.g. '10,20;20,10'")
    p.add_argument("--corpus")
    p.add_argument("--second-corpus")
    p.add_argument("--field", choices=["label", "tense", "gram_aspect"], default="label")
    subs["chisq"] = p

    p = sub.add_parser("crossval", parents=[common(), data(), vectors(), training()],
                       help="stratified k-fold mono-lingual evaluation")
    p.add_argument("--k", type=int, default=10)
    subs["crossval"] = p

    p = sub.add_parser("baseline", parents=[common(), data()], help="majority-class baseline")
    p.add_argument("--protocol", choices=["crossval", "zeroshot"], default="crossval")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--target", action="append", default=[])
    subs["baseline"] = p

    p = sub.add_parser("zeroshot", parents=[common(), data(), vectors(), training()],
                       help="leave-one-language-out transfer")
    p.add_argument("--target", action="append", default=[], help="target language (repeatable; default all)")
    subs["zeroshot"] = p

    p = sub.add_parser("attribution", parents=[common(), data(), vectors(), training()],
                       help="per-language contribution to zero-shot accuracy")
    p.add_argument("--target", action="append", default=[])
    p.add_argument("--include-empty", action="store_true")
    p.add_argument("--metric", choices=list(METRICS), default="accuracy")
    subs["attribution"] = p

    p = sub.add_parser("gen-synthetic", parents=[common()], help="write a synthetic shared-space corpus")
    p.add_argument("--languages", type=_str_list, default=list(DEFAULT_LANGUAGES))
    p.add_argument("--count", type=int, default=100, help="utterances per language")
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--domain", choices=[d.value for d in Domain], default="captions")
    p.add_argument("--corpus-out")
    p.add_argument("--vectors-out", help="sentence-vector TSV (lookup mode)")
    p.add_argument("--word-vectors-out", help="optional word-vector file (mean mode)")
    subs["gen-synthetic"] = p
    return parser, subs


_LANG_RE = re.compile(r"^[a-z]{2}$")
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def read_config(path) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        values[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return values


def apply_config(subparser: argparse.ArgumentParser, values: dict[str, str]) -> None:
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, value in values.items():
        action = actions.get(key)
        if action is None or key in ("config", "help"):
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            low = value.lower()
            if low not in _TRUE | _FALSE:
                raise ConfigError(f"config key {key!r} expects a boolean, got {value!r}")
            defaults[key] = low in _TRUE
        elif isinstance(action, argparse._AppendAction):
            defaults[key] = [action.type(v) if action.type else v for v in value.replace(",", " ").split()]
        else:
            if action.choices is not None and value not in action.choices:
                raise ConfigError(f"config key {key!r}: {value!r} not in {list(action.choices)}")
            defaults[key] = value  # argparse applies ``type`` to string defaults
    subparser.set_defaults(**defaults)


def parse_args(argv: list[str]) -> argparse.Namespace:
    parser, subs = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        command = next((a for a in argv if a in subs), None)
        if command is None:
            raise UsageError("--config needs a subcommand")
        apply_config(subs[command], read_config(known.config))
    return parser.parse_args(argv)


# ----------------------------------------------------------------- helpers


def _require(args, *names):
    for name in names:
        if not getattr(args, name):
            raise ConfigError(f"--{name.replace('_', '-')} is required")


def _train_config(args) -> TrainConfig:
    return TrainConfig(l2_lambda=args.l2, max_iters=args.max_iters, grad_tol=args.grad_tol, seed=args.seed)


def _select(args) -> tuple[Corpus, dict, dict]:
    """Load, restrict to one domain, apply class drop. Returns corpus, policy, bookkeeping."""
    corpus = load_corpus(args.corpus)
    loaded = len(corpus)
    domains = sorted({u.domain.value for u in corpus})
    if args.domain is None and len(domains) > 1:
        raise ConfigError(f"corpus mixes domains {domains}; choose one with --domain")
    domain = args.domain or (domains[0] if domains else None)
    corpus = filter_corpus(corpus, domain=domain)
    if getattr(args, "language", None):
        corpus = filter_corpus(corpus, language=args.language)
    policy = parse_drop_policy(args.drop_policy)
    before = Counter(u.label.value for u in corpus)
    corpus = apply_class_drop(corpus, policy)
    after = Counter(u.label.value for u in corpus)
    info = {
        "domain": domain,
        "n_loaded": loaded,
        "n_selected": sum(before.values()),
        "n_after_drop": len(corpus),
        "dropped": {lab: before[lab] - after[lab] for lab in sorted(before) if before[lab] != after[lab]},
    }
    if len(corpus) == 0:
        raise EmptyCorpus("no utterances left after filtering and class drop")
    return corpus, policy, info


def _vector_sources(args) -> list[tuple[str | None, str]]:
    _require(args, "vectors")
    sources = []
    for entry in args.vectors:
        lang, sep, path = entry.partition("=")
        sources.append((lang, path) if sep and _LANG_RE.match(lang) else (None, entry))
    return sources


def _embed(args, corpus: Corpus) -> tuple[dict, list, dict]:
    """Embed per language; returns {lang: instances}, manifest inputs, info."""
    parse = parse_vector_file if args.mode == "mean" else parse_sentence_vector_file
    sources = _vector_sources(args)
    tables = {lang: parse(path) for lang, path in sources}
    dims = {t.dim for t in tables.values()}
    if len(dims) > 1:
        raise MixedDimensions(f"vector files disagree on dimension: {sorted(dims)}")
    by_lang = {}
    oov = {}
    for lang in sorted(corpus.languages):
        table = tables.get(lang, tables.get(None))
        if table is None:
            raise ConfigError(f"no vector file covers language {lang!r}")
        insts = embed_corpus(filter_corpus(corpus, language=lang), table, normalize=args.normalize)
        by_lang[lang] = insts
        if args.mode == "mean":
            oov[lang] = sum(i.oov_fraction for i in insts) / len(insts)
    inputs = [(f"vectors:{lang}" if lang else "vectors", path) for lang, path in sources]
    info = {"mode": args.mode, "normalize": args.normalize, "dim": dims.pop()}
    if oov:
        info["mean_oov_fraction"] = oov
    return by_lang, inputs, info


def _targets(args, languages: list[str]) -> list[str]:
    return list(dict.fromkeys(args.target)) if args.target else sorted(languages)


# -------------------------------------------------------------- subcommands


def cmd_stats(args) -> dict:
    _require(args, "corpus")
    if any(k < 1 for k in args.k_list):
        raise ConfigError("--k-list entries must be positive")
    corpora = [("corpus", args.corpus)]
    if args.second_corpus:
        corpora.append(("second_corpus", args.second_corpus))
    policy = parse_drop_policy(args.drop_policy)
    warn = []
    top_k, distribution, counts, lengths = {}, {}, {}, {}
    pooled = []
    for role, path in corpora:
        corpus = load_corpus(path)
        corpus = filter_corpus(corpus, language=args.language, domain=args.domain)
        corpus = apply_class_drop(corpus, policy)
        if len(corpus) == 0:
            raise EmptyCorpus(f"{path}: no utterances after filtering")
        pooled.append(corpus)
        groups = sorted({(u.language, u.domain.value) for u in corpus})
        for lang, dom in groups:
            key = f"{lang}/{dom}"
            part = filter_corpus(corpus, language=lang, domain=dom)
            if key in distribution:
                key = f"{role}:{key}"
            distribution[key] = {lab.value: p for lab, p in aspect_distribution(part).items()}
            counts[key] = {lab.value: c for lab, c in label_counts(part).items()}
            lengths[key] = mean_sentence_length(part)
            freq = verb_frequencies(part)
            if freq.total == 0:
                warn.append(f"{key}: no verb_lemma annotations, top-K coverage skipped")
                continue
            top_k[key] = {str(k): top_k_coverage(freq, k) for k in args.k_list}
    stats = {"top_k": top_k, "distribution": distribution, "counts": counts, "mean_length": lengths}
    if len(pooled) == 2:
        table = [[label_counts(c)[lab] for lab in CANONICAL_ORDER] for c in pooled]
        keep = [j for j, lab in enumerate(CANONICAL_ORDER) if table[0][j] + table[1][j] > 0]
        if len(keep) < len(CANONICAL_ORDER):
            warn.append("chi_square: labels absent from both corpora were left out of the table")
        observed = [[row[j] for j in keep] for row in table]
        stats["chi_square"] = {
            "rows": [path for _, path in corpora],
            "columns": [CANONICAL_ORDER[j].value for j in keep],
            "observed": observed,
            **chi_square_homogeneity(observed).to_json(),
        }
    return {
        "experiment": {"type": "stats", "k_list": args.k_list, "language": args.language, "domain": args.domain},
        "stats": stats,
        "inputs": corpora,
        "policy": policy,
        "options": {"k_list": args.k_list, "language": args.language, "domain": args.domain},
        "warnings": warn,
    }


def cmd_kappa(args) -> dict:
    _require(args, "corpus", "second_corpus")
    a, b = load_corpus(args.corpus), load_corpus(args.second_corpus)
    ids_a, ids_b = {u.id for u in a}, {u.id for u in b}
    if ids_a != ids_b:
        only_a, only_b = sorted(ids_a - ids_b), sorted(ids_b - ids_a)
        raise IdSetMismatch(
            f"{len(only_a)} ids only in first file, {len(only_b)} only in second"
            + (f" (e.g. {(only_a or only_b)[0]!r})" if only_a or only_b else "")
        )
    label_b = {u.id: u.label for u in b}
    ids = [u.id for u in a]
    overall = cohen_kappa([u.label for u in a], [label_b[i] for i in ids])
    by_language = {}
    warn = []
    langs = sorted({u.language for u in a})
    if len(langs) > 1:
        for lang in langs:
            part = [u for u in a if u.language == lang]
            try:
                by_language[lang] = cohen_kappa([u.label for u in part], [label_b[u.id] for u in part]).to_json()
            except LexAspectError as exc:
                by_language[lang] = None
                warn.append(f"{lang}: {exc}")
    return {
        "experiment": {"type": "kappa", "n_items": len(ids)},
        "stats": {"kappa": overall.to_json(), "by_language": by_language},
        "inputs": [("corpus", args.corpus), ("second_corpus", args.second_corpus)],
        "options": {},
        "warnings": warn,
    }


def _parse_table(text: str) -> list[list[int]]:
    try:
        return [[int(x) for x in row.split(",")] for row in text.split(";") if row.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse --table {text!r}") from None


def cmd_chisq(args) -> dict:
    if args.table:
        observed = _parse_table(args.table)
        if len({len(r) for r in observed}) > 1:
            raise ConfigError("--table rows differ in length")
        result = chi_square_homogeneity(observed)
        return {
            "experiment": {"type": "chisq", "source": "table"},
            "stats": {"chi_square": {"observed": observed, **result.to_json()}},
            "inputs": [],
            "options": {"table": args.table},
        }
    _require(args, "corpus", "second_corpus")
    corpora = [load_corpus(args.corpus), load_corpus(args.second_corpus)]

    def value(u):
        v = getattr(u, args.field)
        return v.value if args.field == "label" else v

    counters = [Counter(value(u) for u in c if value(u) is not None) for c in corpora]
    seen = set(counters[0]) | set(counters[1])
    if args.field == "label":
        columns = [lab.value for lab in CANONICAL_ORDER if lab.value in seen]
    else:
        columns = sorted(seen)
    observed = [[cnt[col] for col in columns] for cnt in counters]
    result = chi_square_homogeneity(observed)
    return {
        "experiment": {"type": "chisq", "source": "corpora", "field": args.field},
        "stats": {"chi_square": {"columns": columns, "observed": observed, **result.to_json()}},
        "inputs": [("corpus", args.corpus), ("second_corpus", args.second_corpus)],
        "options": {"field": args.field},
    }


def _data_options(args) -> dict:
    return {
        "language": args.language,
        "domain": args.domain,
        "mode": getattr(args, "mode", None),
        "normalize": getattr(args, "normalize", None),
    }


def cmd_crossval(args) -> dict:
    _require(args, "corpus")
    corpus, policy, info = _select(args)
    by_lang, vec_inputs, vec_info = _embed(args, corpus)
    config = _train_config(args)
    metrics, runs = {}, {}
    for lang, insts in by_lang.items():
        report, details = cross_validate(insts, args.k, args.seed, config, threads=args.threads)
        metrics[lang] = report.to_json()
        runs[lang] = details
    return {
        "experiment": {"type": "crossval", "k": args.k, "selection": info, "embedding": vec_info, "runs": runs},
        "metrics": metrics,
        "inputs": [("corpus", args.corpus), *vec_inputs],
        "policy": policy,
        "config": config,
        "options": {**_data_options(args), "k": args.k},
    }


def cmd_baseline(args) -> dict:
    _require(args, "corpus")
    corpus, policy, info = _select(args)
    metrics, runs = {}, {}
    by_lang = {lang: list(filter_corpus(corpus, language=lang)) for lang in sorted(corpus.languages)}
    if args.protocol == "crossval":
        for lang, utts in by_lang.items():
            report, details = cross_validate_baseline([u.label for u in utts], args.k, args.seed)
            metrics[lang], runs[lang] = report.to_json(), details
    else:
        for target in _targets(args, list(by_lang)):
            report, details = zero_shot_baseline(by_lang, target)
            metrics[target], runs[target] = report.to_json(), details
    return {
        "experiment": {"type": "baseline", "protocol": args.protocol, "selection": info, "runs": runs},
        "metrics": metrics,
        "inputs": [("corpus", args.corpus)],
        "policy": policy,
        "options": {"language": args.language, "domain": args.domain, "protocol": args.protocol,
                    "k": args.k, "targets": args.target},
        "seed": args.seed,
    }


def cmd_zeroshot(args) -> dict:
    _require(args, "corpus")
    corpus, policy, info = _select(args)
    by_lang, vec_inputs, vec_info = _embed(args, corpus)
    config = _train_config(args)
    metrics, runs = {}, {}
    for target in _targets(args, list(by_lang)):
        report, details = zero_shot_eval(by_lang, target, config)
        metrics[target], runs[target] = report.to_json(), details
    return {
        "experiment": {"type": "zeroshot", "selection": info, "embedding": vec_info, "runs": runs},
        "metrics": metrics,
        "inputs": [("corpus", args.corpus), *vec_inputs],
        "policy": policy,
        "config": config,
        "options": {**_data_options(args), "targets": args.target},
    }


def cmd_attribution(args) -> dict:
    _require(args, "corpus")
    corpus, policy, info = _select(args)
    by_lang, vec_inputs, vec_info = _embed(args, corpus)
    config = _train_config(args)
    out = {}
    for target in _targets(args, list(by_lang)):
        rep = language_attribution(
            by_lang, target, config, include_empty=args.include_empty, metric=args.metric, threads=args.threads
        )
        out[target] = rep.to_json()
    return {
        "experiment": {"type": "attribution", "selection": info, "embedding": vec_info},
        "attribution": out,
        "inputs": [("corpus", args.corpus), *vec_inputs],
        "policy": policy,
        "config": config,
        "options": {**_data_options(args), "targets": args.target,
                    "include_empty": args.include_empty, "metric": args.metric},
    }


def cmd_gen_synthetic(args) -> dict:
    _require(args, "corpus_out", "vectors_out")
    data = generate(args.languages, args.count, args.dim, args.sigma, args.seed, Domain(args.domain))
    save_corpus(data.corpus, args.corpus_out)
    Path(args.vectors_out).write_text(dumps_sentence_vectors(data.sentence_vectors), encoding="utf-8")
    outputs = [("corpus", args.corpus_out), ("sentence_vectors", args.vectors_out)]
    if args.word_vectors_out:
        Path(args.word_vectors_out).write_text(dumps_vector_table(data.word_vectors), encoding="utf-8")
        outputs.append(("word_vectors", args.word_vectors_out))
    per_language = {
        lang: {lab.value: c for lab, c in label_counts(filter_corpus(data.corpus, language=lang)).items()}
        for lang in args.languages
    }
    options = {"languages": args.languages, "count": args.count, "dim": args.dim,
               "sigma": args.sigma, "domain": args.domain}
    return {
        "experiment": {"type": "gen-synthetic", **options},
        "stats": {
            "n_instances": len(data.corpus),
            "per_language": per_language,
            "outputs": [{"role": r, "path": p, "sha256": sha256_file(p)} for r, p in outputs],
        },
        "inputs": [],
        "options": options,
        "seed": args.seed,
    }


COMMANDS = {
    "stats": cmd_stats,
    "kappa": cmd_kappa,
    "chisq": cmd_chisq,
    "crossval": cmd_crossval,
    "baseline": cmd_baseline,
    "zeroshot": cmd_zeroshot,
    "attribution": cmd_attribution,
    "gen-synthetic": cmd_gen_synthetic,
}


# ------------------------------------------------------------------ output


def run(args: argparse.Namespace) -> dict:
    """Execute one subcommand and assemble its full report."""
    if args.threads < 1:
        raise ConfigError("--threads must be at least 1")
    start = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = COMMANDS[args.command](args)
    duration = time.perf_counter() - start
    messages = result.get("warnings", []) + [f"{w.category.__name__}: {w.message}" for w in caught]
    config = result.get("config")
    seed = result.get("seed", config.seed if config is not None else None)
    manifest = make_manifest(
        args.command,
        result["inputs"],
        seed,
        config.to_json() if config is not None else None,
        policy_to_json(result.get("policy", {})),
        result["options"],
        duration,
    )
    report = {"manifest": manifest, "experiment": result["experiment"]}
    for key in ("metrics", "stats", "attribution"):
        if key in result:
            report[key] = result[key]
    # sorted so thread scheduling cannot reorder them
    report["warnings"] = sorted(set(messages))
    return report


def _fmt(x) -> str:
    return f"{x:.4f}" if isinstance(x, float) else str(x)


def render_pretty(report: dict) -> str:
    lines = [f"# {report['experiment']['type']}"]
    if "metrics" in report:
        lines.append(f"{'group':<10} {'class':<8} {'P':>7} {'R':>7} {'F1':>7} {'tp':>5} {'fp':>5} {'fn':>5}")
        for group, m in report["metrics"].items():
            for cls, pc in m["per_class"].items():
                lines.append(
                    f"{group:<10} {cls:<8} {pc['precision']:>7.4f} {pc['recall']:>7.4f} "
                    f"{pc['f1']:>7.4f} {pc['tp']:>5} {pc['fp']:>5} {pc['fn']:>5}"
                )
            lines.append(f"{group:<10} micro-F1 {m['micro']['f1']:.4f}  accuracy {m['accuracy']:.4f}  n={m['n']}")
    if "attribution" in report:
        for target, a in report["attribution"].items():
            lines.append(f"target {target}: " + "  ".join(f"{k} {v:+.4f}" for k, v in a["impacts"].items()))
    if "stats" in report:
        for key, value in report["stats"].items():
            if isinstance(value, dict):
                lines.append(f"{key}:")
                for k, v in value.items():
                    lines.append(f"  {k}: {json.dumps(v, ensure_ascii=False) if isinstance(v, (dict, list)) else _fmt(v)}")
            else:
                lines.append(f"{key}: {_fmt(value)}")
    for w in report["warnings"]:
        lines.append(f"warning: {w}")
    return "\n".join(lines) + "\n"


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}, ensure_ascii=False) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
        report = run(args)
    except UsageError as exc:
        return _fail("UsageError", str(exc), 2)
    except LexAspectError as exc:
        return _fail(exc.kind, str(exc), 1)
    except (OSError, ValueError) as exc:
        return _fail(type(exc).__name__, str(exc), 1)
    text = dumps_report(report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        if args.pretty:
            sys.stdout.write(render_pretty(report))
    else:
        sys.stdout.write(render_pretty(report) if args.pretty else text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
