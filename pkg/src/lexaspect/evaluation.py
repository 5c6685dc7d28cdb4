"""Evaluation protocols.

* stratified k-fold cross-validation with counts accumulated over folds
* majority-class baseline
* zero-shot leave-one-language-out transfer
* language attribution: the uniform average of a language's marginal
  effect on target accuracy over every coalition of other training
  languages (uniform weights, so not a true Shapley value)
"""

from __future__ import annotations

import math
import warnings
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from . import classifier
from .classifier import TrainConfig
from .corpus import AspectLabel, canonical_labels
from .embeddings import EmbeddedInstance
from .errors import (
    BadK,
    EmptyData,
    EmptyTrain,
    LexAspectError,
    MixedDimensions,
    StratificationInfeasible,
    TargetMissing,
    TooFewContributors,
)
from .rng import SplitMix64


class ProvenanceViolation(LexAspectError):
    """A target-language instance reached a zero-shot training set."""


def _ordered_classes(labels: Iterable[Hashable]) -> list:
    present = set(labels)
    if all(isinstance(x, AspectLabel) for x in present):
        return canonical_labels(present)
    return sorted(present, key=str)


def _label_str(label) -> str:
    return label.value if isinstance(label, AspectLabel) else str(label)


# ---------------------------------------------------------------- counting


@dataclass
class EvalCounts:
    """Per-class TP/FP/FN accumulated over any number of evaluation rounds."""

    classes: tuple
    tp: dict = field(default_factory=dict)
    fp: dict = field(default_factory=dict)
    fn: dict = field(default_factory=dict)
    support: dict = field(default_factory=dict)
    n: int = 0
    correct: int = 0

    def __post_init__(self):
        for c in self.classes:
            for table in (self.tp, self.fp, self.fn, self.support):
                table.setdefault(c, 0)

    def add(self, gold, pred) -> None:
        for c in (gold, pred):
            if c not in self.tp:
                raise ValueError(f"label {c!r} is outside the evaluated class set")
        self.n += 1
        self.support[gold] += 1
        if gold == pred:
            self.tp[gold] += 1
            self.correct += 1
        else:
            self.fp[pred] += 1
            self.fn[gold] += 1

    def add_all(self, golds: Sequence, preds: Sequence) -> None:
        if len(golds) != len(preds):
            raise ValueError("gold and predicted sequences differ in length")
        for g, p in zip(golds, preds):
            self.add(g, p)

    def merge(self, other: "EvalCounts") -> None:
        for c in other.classes:
            if c not in self.tp:
                raise ValueError(f"label {c!r} is outside the evaluated class set")
            self.tp[c] += other.tp[c]
            self.fp[c] += other.fp[c]
            self.fn[c] += other.fn[c]
            self.support[c] += other.support[c]
        self.n += other.n
        self.correct += other.correct


def _ratio(num: int, den: int) -> Fraction:
    return Fraction(num, den) if den else Fraction(0)


def _f1(p: Fraction, r: Fraction) -> Fraction:
    return 2 * p * r / (p + r) if p + r else Fraction(0)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    support: int
    zero_division: bool


@dataclass(frozen=True)
class MetricsReport:
    """Metrics derived from one accumulated ``EvalCounts``; rounded once from exact fractions."""

    per_class: dict
    micro_precision: float
    micro_recall: float
    micro_f1: float
    macro_f1: float
    accuracy: float
    counts: EvalCounts

    @classmethod
    def from_counts(cls, counts: EvalCounts) -> "MetricsReport":
        per_class = {}
        f1s = []
        for c in counts.classes:
            tp, fp, fn = counts.tp[c], counts.fp[c], counts.fn[c]
            p, r = _ratio(tp, tp + fp), _ratio(tp, tp + fn)
            f1 = _f1(p, r)
            f1s.append(f1)
            per_class[c] = ClassMetrics(
                float(p), float(r), float(f1), tp, fp, fn, counts.support[c],
                zero_division=(tp + fp == 0) or (tp + fn == 0),
            )
        tp = sum(counts.tp.values())
        mp = _ratio(tp, tp + sum(counts.fp.values()))
        mr = _ratio(tp, tp + sum(counts.fn.values()))
        macro = sum(f1s, Fraction(0)) / len(f1s) if f1s else Fraction(0)
        return cls(
            per_class, float(mp), float(mr), float(_f1(mp, mr)), float(macro),
            float(_ratio(counts.correct, counts.n)), counts,
        )

    def to_json(self) -> dict:
        return {
            "classes": [_label_str(c) for c in self.counts.classes],
            "n": self.counts.n,
            "per_class": {
                _label_str(c): {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "tp": m.tp,
                    "fp": m.fp,
                    "fn": m.fn,
                    "support": m.support,
                    "zero_division": m.zero_division,
                }
                for c, m in self.per_class.items()
            },
            "micro": {
                "precision": self.micro_precision,
                "recall": self.micro_recall,
                "f1": self.micro_f1,
            },
            "macro_f1": self.macro_f1,
            "accuracy": self.accuracy,
        }


# ------------------------------------------------------------------ folds


@dataclass(frozen=True)
class FoldPlan:
    assignments: tuple[int, ...]
    k: int
    seed: int

    def fold_indices(self, fold: int) -> list[int]:
        return [i for i, f in enumerate(self.assignments) if f == fold]

    @property
    def sizes(self) -> list[int]:
        counts = Counter(self.assignments)
        return [counts.get(f, 0) for f in range(self.k)]


def _fold_sizes(n: int, k: int) -> list[int]:
    base, extra = divmod(n, k)
    return [base + (1 if f < extra else 0) for f in range(k)]


def _class_quotas(class_sizes: list[int], fold_sizes: list[int]) -> list[list[int]]:
    """Integer matrix with the given margins, every cell within 1 of n_c * s_f / N.

    Start from the floors of the exact proportional shares, then hand out
    the leftover units one per fractional cell with augmenting paths
    (rows and columns scanned in index order, so the result is fixed).
    """
    n = sum(class_sizes)
    share = [[Fraction(nc * sf, n) for sf in fold_sizes] for nc in class_sizes]
    quota = [[math.floor(e) for e in row] for row in share]
    frac = [[e.denominator != 1 for e in row] for row in share]
    need_row = [nc - sum(row) for nc, row in zip(class_sizes, quota)]
    need_col = [sf - sum(quota[c][f] for c in range(len(class_sizes))) for f, sf in enumerate(fold_sizes)]
    bumped = [[False] * len(fold_sizes) for _ in class_sizes]
    n_cols = len(fold_sizes)

    def augment(c: int, seen: set) -> bool:
        for f in range(n_cols):
            if not frac[c][f] or bumped[c][f] or f in seen:
                continue
            seen.add(f)
            if need_col[f] > 0:
                need_col[f] -= 1
                bumped[c][f] = True
                return True
            # reroute a unit another class already placed in column f
            for c2 in range(len(class_sizes)):
                if bumped[c2][f] and augment(c2, seen):
                    bumped[c2][f] = False
                    bumped[c][f] = True
                    return True
        return False

    for c in range(len(class_sizes)):
        while need_row[c] > 0:
            if not augment(c, set()):  # pragma: no cover - margins always admit a rounding
                raise RuntimeError("no controlled rounding found")
            need_row[c] -= 1
    return [[q + b for q, b in zip(qrow, brow)] for qrow, brow in zip(quota, bumped)]


def make_folds(labels: Sequence[Hashable], k: int, seed: int) -> FoldPlan:
    """Stratified fold assignment.

    Fold sizes are ``N // k`` plus one for the first ``N % k`` folds. Each
    class gets a per-fold quota within one of its proportional share
    ``n_c * size_f / N``. Classes are visited in canonical order; each
    class's indices are shuffled with one SplitMix64 stream seeded by
    ``seed`` and dealt round-robin over the folds that still have quota.
    """
    n = len(labels)
    if k < 2 or k > n:
        raise BadK(f"k must satisfy 2 <= k <= {n}, got {k}")
    by_class: dict = {}
    for i, lab in enumerate(labels):
        by_class.setdefault(lab, []).append(i)
    small = [c for c, idx in by_class.items() if len(idx) < k]
    if small:
        warnings.warn(
            f"classes with fewer than {k} instances: {sorted(_label_str(c) for c in small)}",
            StratificationInfeasible,
            stacklevel=2,
        )
    order = _ordered_classes(by_class)
    quotas = _class_quotas([len(by_class[c]) for c in order], _fold_sizes(n, k))
    rng = SplitMix64(seed)
    assignments = [0] * n
    for c, quota in zip(order, quotas):
        idx = list(by_class[c])
        rng.shuffle(idx)
        remaining = list(quota)
        f = 0
        for i in idx:
            while remaining[f] == 0:
                f = (f + 1) % k
            assignments[i] = f
            remaining[f] -= 1
            f = (f + 1) % k
    return FoldPlan(tuple(assignments), k, seed)


# ------------------------------------------------------------ protocols


def _check_dims(instances: Iterable[EmbeddedInstance]) -> int:
    dims = {inst.vector.shape[0] for inst in instances}
    if len(dims) > 1:
        raise MixedDimensions(f"instances have differing dimensions {sorted(dims)}")
    return dims.pop() if dims else 0


def _map(fn: Callable, items: list, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _fit_and_count(train_set, test_set, classes, config) -> tuple[EvalCounts, dict]:
    model, trace = classifier.train(train_set, classes, config)
    counts = EvalCounts(tuple(classes))
    counts.add_all([inst.label for inst in test_set], classifier.predict_many(model, test_set))
    return counts, trace.to_json()


def cross_validate(
    instances: Sequence[EmbeddedInstance],
    k: int = 10,
    seed: int = 0,
    config: TrainConfig = TrainConfig(),
    threads: int = 1,
) -> tuple[MetricsReport, dict]:
    """Stratified k-fold CV; TP/FP/FN from every fold go into a single tally.

    Returns the report plus run details (fold sizes, per-fold traces).
    """
    if not instances:
        raise EmptyData("cannot cross-validate zero instances")
    _check_dims(instances)
    labels = [inst.label for inst in instances]
    classes = canonical_labels(labels)
    plan = make_folds(labels, k, seed)

    def run_fold(f: int):
        test = [instances[i] for i in plan.fold_indices(f)]
        train_set = [inst for inst, a in zip(instances, plan.assignments) if a != f]
        return _fit_and_count(train_set, test, classes, config)

    results = _map(run_fold, list(range(plan.k)), threads)
    total = EvalCounts(tuple(classes))
    for counts, _ in results:
        total.merge(counts)
    details = {
        "k": plan.k,
        "seed": seed,
        "n_instances": len(instances),
        "fold_sizes": plan.sizes,
        "n_trainings": len(results),
        "folds": [trace for _, trace in results],
    }
    return MetricsReport.from_counts(total), details


def majority_label(train_labels: Sequence[Hashable]):
    """Most frequent label; ties go to the lowest canonical class."""
    if not train_labels:
        raise EmptyTrain("majority baseline needs training labels")
    counts = Counter(train_labels)
    best = max(counts.values())
    return next(c for c in _ordered_classes(counts) if counts[c] == best)


def majority_baseline(
    train_labels: Sequence[Hashable],
    test_labels: Sequence[Hashable],
    classes: Sequence[Hashable] | None = None,
) -> MetricsReport:
    guess = majority_label(train_labels)
    if classes is None:
        classes = _ordered_classes(list(train_labels) + list(test_labels))
    counts = EvalCounts(tuple(classes))
    counts.add_all(list(test_labels), [guess] * len(test_labels))
    return MetricsReport.from_counts(counts)


def cross_validate_baseline(labels: Sequence[Hashable], k: int = 10, seed: int = 0) -> tuple[MetricsReport, dict]:
    """Majority baseline under the same folds ``cross_validate`` would use."""
    classes = _ordered_classes(labels)
    plan = make_folds(labels, k, seed)
    total = EvalCounts(tuple(classes))
    for f in range(plan.k):
        train_labels = [lab for lab, a in zip(labels, plan.assignments) if a != f]
        test_labels = [labels[i] for i in plan.fold_indices(f)]
        guess = majority_label(train_labels)
        total.add_all(test_labels, [guess] * len(test_labels))
    details = {"k": plan.k, "seed": seed, "n_instances": len(labels), "fold_sizes": plan.sizes}
    return MetricsReport.from_counts(total), details


def _split_by_target(corpora: Mapping[str, Sequence], target: str, check_dims: bool = True):
    if not corpora.get(target):
        raise TargetMissing(f"no instances for target language {target!r}")
    test = list(corpora[target])
    contributors = sorted(lang for lang, insts in corpora.items() if lang != target and insts)
    if check_dims:
        _check_dims(inst for insts in corpora.values() for inst in insts)
    return test, contributors


def _training_union(corpora, languages, target) -> list[EmbeddedInstance]:
    train_set = [inst for lang in languages for inst in corpora[lang]]
    leaked = sorted({inst.id for inst in train_set if inst.language == target})
    if leaked:
        raise ProvenanceViolation(
            f"{len(leaked)} target-language ({target}) instances in training data, e.g. {leaked[0]!r}"
        )
    return train_set


def zero_shot_baseline(corpora: Mapping[str, Sequence], target: str) -> tuple[MetricsReport, dict]:
    """Majority label of the non-target languages, scored on the target.

    Only ``id``, ``language`` and ``label`` are read, so raw utterances work too.
    """
    test, contributors = _split_by_target(corpora, target, check_dims=False)
    if not contributors:
        raise TargetMissing("zero-shot evaluation needs at least one non-target language")
    train_set = _training_union(corpora, contributors, target)
    report = majority_baseline([i.label for i in train_set], [i.label for i in test])
    return report, {"target": target, "train_languages": contributors,
                    "n_train": len(train_set), "n_test": len(test)}


def zero_shot_eval(
    corpora: Mapping[str, Sequence[EmbeddedInstance]],
    target: str,
    config: TrainConfig = TrainConfig(),
) -> tuple[MetricsReport, dict]:
    """Train on every language except ``target``, test on ``target``."""
    test, contributors = _split_by_target(corpora, target)
    if not contributors:
        raise TargetMissing("zero-shot evaluation needs at least one non-target language")
    train_set = _training_union(corpora, contributors, target)
    classes = canonical_labels(inst.label for inst in list(train_set) + test)
    counts, trace = _fit_and_count(train_set, test, classes, config)
    details = {
        "target": target,
        "train_languages": contributors,
        "n_train": len(train_set),
        "n_test": len(test),
        "train": trace,
    }
    return MetricsReport.from_counts(counts), details


# ------------------------------------------------------------ attribution


def coalition_key(coalition: Iterable[str]) -> str:
    """Canonical map key: sorted languages joined by '+'; the empty coalition is ''."""
    return "+".join(sorted(coalition))


def all_coalitions(players: Sequence[str], include_empty: bool = False) -> list[tuple[str, ...]]:
    """Subsets of ``players`` by size, then lexicographically."""
    players = sorted(players)
    start = 0 if include_empty else 1
    return [c for r in range(start, len(players) + 1) for c in combinations(players, r)]


def marginal_impacts(
    players: Sequence[str], values: Mapping[str, float], include_empty: bool = False
) -> dict[str, float]:
    """Uniform mean of v(S + p) - v(S) over admissible S not containing p.

    ``values`` maps ``coalition_key`` to a coalition's value and must cover
    every admissible coalition. The sum is taken with ``math.fsum`` so the
    result does not depend on enumeration order.
    """
    players = sorted(players)
    impacts = {}
    for p in players:
        others = [q for q in players if q != p]
        diffs = [
            values[coalition_key(s + (p,))] - values[coalition_key(s)]
            for s in all_coalitions(others, include_empty)
        ]
        if not diffs:
            raise TooFewContributors("need at least two contributors when the empty coalition is excluded")
        impacts[p] = math.fsum(diffs) / len(diffs)
    return impacts


@dataclass(frozen=True)
class AttributionReport:
    target: str
    impacts: dict
    coalition_values: dict
    include_empty: bool
    metric: str
    empty_value: float | None
    n_trainings: int
    classes: tuple

    def to_json(self) -> dict:
        out = {
            "target": self.target,
            "metric": self.metric,
            "include_empty": self.include_empty,
            "contributors": sorted(self.impacts),
            "impacts": {k: self.impacts[k] for k in sorted(self.impacts)},
            "coalition_values": dict(self.coalition_values),
            "n_coalitions": len(self.coalition_values),
            "n_trainings": self.n_trainings,
            "classes": [_label_str(c) for c in self.classes],
        }
        if self.include_empty:
            out["empty_coalition_value"] = self.empty_value
            out["empty_coalition_definition"] = "expected accuracy of a uniform random predictor, 1/|classes|"
        return out


METRICS = ("accuracy", "micro-f1")


def language_attribution(
    corpora: Mapping[str, Sequence[EmbeddedInstance]],
    target: str,
    config: TrainConfig = TrainConfig(),
    include_empty: bool = False,
    metric: str = "accuracy",
    threads: int = 1,
) -> AttributionReport:
    """Attribute target-language performance to each training language.

    Every nonempty coalition of contributor languages is trained exactly
    once; the empty coalition, when requested, is valued at 1/|classes|.
    """
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}")
    test, contributors = _split_by_target(corpora, target)
    if len(contributors) < 2:
        raise TooFewContributors(
            f"attribution needs at least two contributor languages, got {contributors}"
        )
    classes = canonical_labels(
        [inst.label for inst in test]
        + [inst.label for lang in contributors for inst in corpora[lang]]
    )

    def value(coalition: tuple[str, ...]) -> float:
        train_set = _training_union(corpora, coalition, target)
        counts, _ = _fit_and_count(train_set, test, classes, config)
        report = MetricsReport.from_counts(counts)
        return report.accuracy if metric == "accuracy" else report.micro_f1

    coalitions = all_coalitions(contributors)
    scores = _map(value, coalitions, threads)
    values = {coalition_key(c): v for c, v in zip(coalitions, scores)}
    empty_value = None
    if include_empty:
        empty_value = 1.0 / len(classes)
        values = {"": empty_value, **values}
    impacts = marginal_impacts(contributors, values, include_empty)
    return AttributionReport(
        target, impacts, values, include_empty, metric, empty_value, len(coalitions), tuple(classes)
    )

