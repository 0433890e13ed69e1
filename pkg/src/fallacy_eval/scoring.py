"""Precision, recall and F1 for post-level and span-level fallacy tasks.

Span tasks use a token-based partial-match metric: every (gold, predicted)
span pair contributes its token overlap, normalized by the length of the
span on the side being measured and weighted by a label credit. Gold and
predicted spans are pooled over the whole test set; token identities are
namespaced by post so spans of different posts never intersect.
"""

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .corpus import FallacySpan
from .formats import same_label_overlaps
from .labels import FINE_LABELS, MACRO_LABELS, canonical
from .taxonomy import delta, macro_parents

log = logging.getLogger(__name__)

EMPTY_SET_CONVENTION = (
    "no gold and no predictions scores 1; predictions without gold, or gold "
    "without predictions, score 0"
)


class Task(str, enum.Enum):
    POST_C = "post-c"
    POST_F = "post-f"
    SPAN_C = "span-c"
    SPAN_F = "span-f"

    @property
    def is_span(self):
        return self in (Task.SPAN_C, Task.SPAN_F)

    @property
    def coarse(self):
        return self in (Task.POST_C, Task.SPAN_C)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScoringConfig:
    task: Task = Task.SPAN_F
    mode: str = "strict"
    delta_partial: float = 0.5
    cap_per_span: bool = False
    symmetric_soft: bool = False

    def __post_init__(self):
        object.__setattr__(self, "task", Task(self.task))
        if self.mode not in ("strict", "soft"):
            raise ConfigError(f"mode must be strict or soft, got {self.mode!r}")
        if self.mode == "soft" and self.task is not Task.SPAN_F:
            raise ConfigError("soft mode is only defined for the span-f task")
        if not 0.0 <= self.delta_partial <= 1.0:
            raise ConfigError("delta_partial must lie in [0, 1]")

    def as_dict(self):
        return {
            "task": self.task.value,
            "mode": self.mode,
            "delta_partial": self.delta_partial,
            "cap_per_span": self.cap_per_span,
            "symmetric_soft": self.symmetric_soft,
        }


@dataclass(frozen=True)
class MetricTriple:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, p, r):
        return cls(p, r, 2 * p * r / (p + r) if p + r > 0 else 0.0)

    def as_dict(self):
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


def mean_triple(triples):
    """Arithmetic mean of P, R and F1 separately (F1 is not recomputed)."""
    triples = list(triples)
    # fsum keeps the mean exact up to one rounding, whatever the view order
    return MetricTriple(*(math.fsum(getattr(t, k) for t in triples) / len(triples)
                          for k in ("precision", "recall", "f1")))


def std_triple(triples):
    triples = list(triples)
    return MetricTriple(*(float(np.std([getattr(t, k) for t in triples]))
                          for k in ("precision", "recall", "f1")))


# -- span metric ----------------------------------------------------------------

def span_tokens(post_id, span):
    return {(post_id, i) for i in range(span.start, span.end)}


def pair_credit(s, t, h, d):
    """Credit of gold span ``s`` against predicted span ``t``.

    Both are ``(post_id, FallacySpan)`` pairs; ``h`` is the normalizing
    length and ``d`` the label credit.
    """
    if h <= 0:
        raise ValueError("normalizing length must be positive")
    return d * _overlap(s, t) / h


def _overlap(s, t):
    (ps, a), (pt, b) = s, t
    if ps != pt:
        return 0
    return max(0, min(a.end, b.end) - max(a.start, b.start))


def _credit_fn(config, taxonomy):
    cache = {}

    def credit(gold, pred):
        key = (gold, pred)
        if key not in cache:
            cache[key] = delta(config.mode, taxonomy, gold, pred,
                               partial=config.delta_partial, symmetric=config.symmetric_soft)
        return cache[key]

    return credit


def score_spans(gold, pred, taxonomy, config):
    """Token-based partial-match P/R/F1 between pooled span sets.

    ``gold`` and ``pred`` are iterables of ``(post_id, FallacySpan)``.
    """
    if not config.task.is_span:
        raise ConfigError(f"{config.task.value} is not a span task")
    gold = list(gold)
    pred = list(pred)
    if not gold and not pred:
        return MetricTriple(1.0, 1.0, 1.0)
    if not gold or not pred:
        return MetricTriple(0.0, 0.0, 0.0)
    credit = _credit_fn(config, taxonomy)

    by_post = {}
    for i, (pid, s) in enumerate(gold):
        by_post.setdefault(pid, ([], []))[0].append((i, s))
    for j, (pid, t) in enumerate(pred):
        by_post.setdefault(pid, ([], []))[1].append((j, t))

    p_terms = np.zeros(len(pred))
    r_terms = np.zeros(len(gold))
    for g_list, p_list in by_post.values():
        for i, s in g_list:
            for j, t in p_list:
                inter = min(s.end, t.end) - max(s.start, t.start)
                if inter <= 0:
                    continue
                d = credit(s.label, t.label)
                if d == 0.0:
                    continue
                p_terms[j] += d * inter / (t.end - t.start)
                r_terms[i] += d * inter / (s.end - s.start)
    if config.cap_per_span:
        np.minimum(p_terms, 1.0, out=p_terms)
        np.minimum(r_terms, 1.0, out=r_terms)
    return MetricTriple.from_pr(float(p_terms.sum() / len(pred)), float(r_terms.sum() / len(gold)))


# -- coarse mapping and post labels ---------------------------------------------

def _merge(spans):
    """Union same-label spans that overlap or touch."""
    out = []
    by_label = {}
    for s in spans:
        by_label.setdefault(s.label, []).append(s)
    for label, group in by_label.items():
        group.sort()
        cur_start, cur_end = group[0].start, group[0].end
        for s in group[1:]:
            if s.start <= cur_end:
                cur_end = max(cur_end, s.end)
            else:
                out.append(FallacySpan(cur_start, cur_end, label))
                cur_start, cur_end = s.start, s.end
        out.append(FallacySpan(cur_start, cur_end, label))
    return tuple(sorted(out))


def to_coarse(spans, taxonomy):
    """Map one view's spans onto macro-categories.

    Each span is copied once per macro parent, then same-label spans that
    overlap or touch are merged. Spans already carrying a macro label pass
    through unchanged.
    """
    mapped = []
    for s in spans:
        code = canonical(s.label)
        if code in MACRO_LABELS:
            mapped.append(FallacySpan(s.start, s.end, code))
            continue
        for macro in macro_parents(taxonomy, code):
            mapped.append(FallacySpan(s.start, s.end, macro))
    return _merge(mapped) if mapped else ()


def coarse_labels(labels, taxonomy):
    out = set()
    for label in labels:
        code = canonical(label)
        if code in MACRO_LABELS:
            out.add(code)
        else:
            out |= macro_parents(taxonomy, code)
    return frozenset(out)


def post_labels(spans, granularity, taxonomy=None):
    """Set of unique labels in a post's spans, fine or mapped to macros."""
    fine = frozenset(canonical(s.label) for s in spans)
    if granularity == "fine":
        return fine
    if granularity == "coarse":
        return coarse_labels(fine, taxonomy)
    raise ValueError(f"granularity must be fine or coarse, got {granularity!r}")


def score_posts(gold_sets, pred_sets):
    """Micro-averaged P/R/F1 over per-post label sets keyed by post id."""
    if set(gold_sets) != set(pred_sets):
        missing = sorted(set(gold_sets) - set(pred_sets))
        extra = sorted(set(pred_sets) - set(gold_sets))
        raise ValueError(f"post ids differ: missing {missing[:5]}, extra {extra[:5]}")
    tp = fp = fn = 0
    for pid, g in gold_sets.items():
        p = pred_sets[pid]
        tp += len(g & p)
        fp += len(p - g)
        fn += len(g - p)
    if tp + fp + fn == 0:
        return MetricTriple(1.0, 1.0, 1.0)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return MetricTriple.from_pr(precision, recall)


# -- corpus-level evaluation ----------------------------------------------------

@dataclass
class EvalReport:
    config: ScoringConfig
    view_ids: List[str]
    per_view: Dict[str, MetricTriple]
    aggregate: MetricTriple
    folds: List["EvalReport"] = field(default_factory=list)
    fold_mean: Optional[MetricTriple] = None
    fold_std: Optional[MetricTriple] = None
    per_post: Optional[Dict[str, Dict[str, MetricTriple]]] = None
    warnings: List[str] = field(default_factory=list)

    def as_dict(self):
        out = {
            "config": self.config.as_dict(),
            "conventions": {
                "empty_sets": EMPTY_SET_CONVENTION,
                "aggregation": "arithmetic mean of per-view precision, recall and F1",
                "capped": self.config.cap_per_span,
            },
            "per_view": {v: self.per_view[v].as_dict() for v in self.view_ids},
            "aggregate": self.aggregate.as_dict(),
        }
        if self.folds:
            out["folds"] = [{"fold": i + 1,
                             "per_view": {v: f.per_view[v].as_dict() for v in f.view_ids},
                             "aggregate": f.aggregate.as_dict()}
                            for i, f in enumerate(self.folds)]
            out["fold_mean"] = self.fold_mean.as_dict()
            out["fold_std"] = self.fold_std.as_dict()
        if self.per_post is not None:
            out["per_post"] = {pid: {v: t.as_dict() for v, t in d.items()}
                               for pid, d in self.per_post.items()}
        if self.warnings:
            out["warnings"] = list(self.warnings)
        return out

    def tsv_rows(self):
        """Rows of (fold, view, precision, recall, f1)."""
        rows = []

        def emit(fold, report):
            for v in report.view_ids:
                t = report.per_view[v]
                rows.append((fold, v, t.precision, t.recall, t.f1))
            t = report.aggregate
            rows.append((fold, "aggregate", t.precision, t.recall, t.f1))

        if self.folds:
            for i, f in enumerate(self.folds):
                emit(str(i + 1), f)
            rows.append(("mean", "aggregate", *self._vals(self.fold_mean)))
            rows.append(("std", "aggregate", *self._vals(self.fold_std)))
        else:
            emit("all", self)
        return rows

    @staticmethod
    def _vals(t):
        return t.precision, t.recall, t.f1


def _gold_view_spans(post, view_id, config, taxonomy):
    spans = post.views[view_id].spans
    return to_coarse(spans, taxonomy) if config.task.coarse else spans


def _pred_spans(pred, view_id, config, taxonomy):
    try:
        spans = pred.spans_for(view_id)
    except KeyError:
        raise ValueError(f"post {pred.post_id}: paired prediction lacks view {view_id}") from None
    if spans is None:
        raise ValueError(f"post {pred.post_id}: span task needs 'spans' or 'views' predictions")
    if config.task is Task.SPAN_F:
        for s in spans:
            if s.label not in FINE_LABELS:
                raise ValueError(f"post {pred.post_id}: span-f prediction label {s.label} "
                                 "is not a fine fallacy type")
        return spans
    return to_coarse(spans, taxonomy)


def _pred_labels(pred, view_id, config, taxonomy):
    gran = "coarse" if config.task.coarse else "fine"
    if pred.labels is not None:
        labels = pred.labels
        if gran == "coarse":
            return coarse_labels(labels, taxonomy)
        bad = [x for x in labels if x not in FINE_LABELS]
        if bad:
            raise ValueError(f"post {pred.post_id}: post-f label {bad[0]} is not a fine type")
        return frozenset(labels)
    try:
        spans = pred.spans_for(view_id)
    except KeyError:
        raise ValueError(f"post {pred.post_id}: paired prediction lacks view {view_id}") from None
    return post_labels(spans, gran, taxonomy)


def _score_view(gold, preds, view_id, config, taxonomy, warnings, per_post=None):
    if config.task.is_span:
        g_all, p_all = [], []
        overlaps = 0
        for post in gold.posts:
            g = _gold_view_spans(post, view_id, config, taxonomy)
            p = _pred_spans(preds[post.id], view_id, config, taxonomy)
            overlaps += same_label_overlaps(p)
            g_all.extend((post.id, s) for s in g)
            p_all.extend((post.id, s) for s in p)
            if per_post is not None:
                per_post.setdefault(post.id, {})[view_id] = score_spans(
                    [(post.id, s) for s in g], [(post.id, s) for s in p], taxonomy, config)
        if overlaps and not config.cap_per_span:
            msg = (f"view {view_id}: predictions contain {overlaps} same-label overlapping span "
                   "pairs; uncapped scores may exceed 1 (consider --cap-per-span)")
            log.warning(msg)
            warnings.append(msg)
        return score_spans(g_all, p_all, taxonomy, config)
    gran = "coarse" if config.task.coarse else "fine"
    g_sets, p_sets = {}, {}
    for post in gold.posts:
        g_sets[post.id] = post_labels(post.views[view_id].spans, gran, taxonomy)
        p_sets[post.id] = _pred_labels(preds[post.id], view_id, config, taxonomy)
        if per_post is not None:
            per_post.setdefault(post.id, {})[view_id] = score_posts(
                {post.id: g_sets[post.id]}, {post.id: p_sets[post.id]})
    return score_posts(g_sets, p_sets)


def evaluate(gold, preds, config, taxonomy, folds=None, per_post=False):
    """Score predictions against every gold view and macro-average.

    ``preds`` maps post id to Prediction and must cover exactly the gold
    posts. ``folds`` is an optional list of test-id lists; each fold is
    scored separately and mean/std across folds are added.
    """
    gold_ids = set(gold.ids)
    if set(preds) != gold_ids:
        missing = sorted(gold_ids - set(preds))
        extra = sorted(set(preds) - gold_ids)
        raise ValueError(f"prediction post ids differ from gold: missing {missing[:5]}"
                         f"{'...' if len(missing) > 5 else ''}, extra {extra[:5]}"
                         f"{'...' if len(extra) > 5 else ''}")
    if folds:
        reports = []
        for i, ids in enumerate(folds):
            unknown = sorted(set(ids) - gold_ids)
            if unknown:
                raise ValueError(f"fold {i + 1}: ids not in gold: {unknown[:5]}")
            reports.append(evaluate(gold.subset(ids), {pid: preds[pid] for pid in ids},
                                    config, taxonomy))
        whole = evaluate(gold, preds, config, taxonomy, per_post=per_post)
        whole.folds = reports
        whole.fold_mean = mean_triple(r.aggregate for r in reports)
        whole.fold_std = std_triple(r.aggregate for r in reports)
        for r in reports:
            whole.warnings.extend(w for w in r.warnings if w not in whole.warnings)
        return whole

    warnings = []
    breakdown = {} if per_post else None
    per_view = {}
    for view_id in gold.view_ids:
        per_view[view_id] = _score_view(gold, preds, view_id, config, taxonomy, warnings, breakdown)
    aggregate = mean_triple(per_view[v] for v in gold.view_ids) if per_view else MetricTriple(
        math.nan, math.nan, math.nan)
    return EvalReport(config, list(gold.view_ids), per_view, aggregate,
                      per_post=breakdown, warnings=warnings)
