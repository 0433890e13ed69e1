"""Descriptive corpus statistics: span counts and lengths, annotation
density, token-level overlap between fallacy types, informative tokens."""

import math
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from .labels import FINE_LABELS, MACRO_LABELS, canonical
from .scoring import to_coarse


@dataclass
class LabelStats:
    count: int
    mean_length: float
    std_length: float

    def as_dict(self):
        return {"spans": self.count, "mean_length": self.mean_length, "std_length": self.std_length}


@dataclass
class ViewStats:
    per_label: Dict[str, LabelStats]
    total: LabelStats
    posts: int
    tokens: int

    @property
    def density(self):
        return self.total.count / self.posts if self.posts else 0.0

    def as_dict(self):
        return {
            "posts": self.posts,
            "tokens": self.tokens,
            "spans": self.total.count,
            "mean_length": self.total.mean_length,
            "std_length": self.total.std_length,
            "density": self.density,
            "per_label": {k: v.as_dict() for k, v in self.per_label.items()},
        }


@dataclass
class StatsReport:
    views: List[str]
    per_view: Dict[str, ViewStats]
    combined: ViewStats
    density_mean: float
    density_std: float

    def as_dict(self):
        return {
            "views": self.views,
            "std": "population",
            "combined": self.combined.as_dict(),
            "density": {"mean": self.density_mean, "std": self.density_std},
            "per_view": {v: self.per_view[v].as_dict() for v in self.views},
        }

    def tsv_rows(self):
        rows = []
        blocks = [("combined", self.combined)] + [(v, self.per_view[v]) for v in self.views]
        for name, vs in blocks:
            for label, ls in vs.per_label.items():
                rows.append((name, label, ls.count, ls.mean_length, ls.std_length))
            rows.append((name, "ALL", vs.total.count, vs.total.mean_length, vs.total.std_length))
        return rows


def _length_stats(lengths):
    if not lengths:
        return LabelStats(0, math.nan, math.nan)
    arr = np.asarray(lengths, dtype=float)
    return LabelStats(len(lengths), float(arr.mean()), float(arr.std()))


def _view_stats(corpus, view_ids):
    lengths = {code: [] for code in FINE_LABELS}
    everything = []
    for vid in view_ids:
        for _, s in corpus.spans(vid):
            lengths.setdefault(s.label, []).append(len(s))
            everything.append(len(s))
    return ViewStats(
        {code: _length_stats(lens) for code, lens in lengths.items()},
        _length_stats(everything),
        posts=len(corpus),
        tokens=sum(p.n_tokens for p in corpus.posts),
    )


def corpus_stats(corpus, view=None):
    """Span counts and token lengths per fallacy, per view and combined.

    ``view`` selects one view; None pools all views. Standard deviations are
    population deviations. Density is spans per post, reported as mean and
    standard deviation across the selected views.
    """
    if view is None:
        views = list(corpus.view_ids)
    else:
        if view not in corpus.view_ids:
            raise KeyError(f"unknown view {view!r}")
        views = [view]
    per_view = {v: _view_stats(corpus, [v]) for v in views}
    combined = _view_stats(corpus, views)
    densities = np.array([per_view[v].density for v in views]) if views else np.array([0.0])
    return StatsReport(views, per_view, combined, float(densities.mean()), float(densities.std()))


# -- overlaps -------------------------------------------------------------------

@dataclass
class OverlapMatrix:
    labels: List[str]
    cells: np.ndarray  # percentages, NaN where undefined
    base: Dict[str, int]

    def cell(self, row, col):
        return float(self.cells[self.labels.index(row), self.labels.index(col)])

    def as_dict(self):
        return {
            "labels": self.labels,
            "base_tokens": self.base,
            "rows": {r: {c: (None if math.isnan(self.cells[i, j]) else float(self.cells[i, j]))
                         for j, c in enumerate(self.labels)}
                     for i, r in enumerate(self.labels)},
        }

    def to_tsv(self, digits=2):
        lines = ["\t".join(["label"] + self.labels)]
        for i, r in enumerate(self.labels):
            vals = ["NA" if math.isnan(v) else f"{v:.{digits}f}" for v in self.cells[i]]
            lines.append("\t".join([r] + vals))
        return "\n".join(lines) + "\n"


def overlap_matrix(corpus, views=None, granularity="fine", taxonomy=None):
    """Percentage of each label's tokens that are also covered by another label.

    Token occurrences are (view, post, token) triples, so overlaps are only
    counted within a view; selecting several views pools their occurrences.
    The diagonal holds the percentage of a label's tokens not covered by any
    other label. Rows with no tokens are NaN.
    """
    views = list(views or corpus.view_ids)
    if granularity == "fine":
        labels = list(FINE_LABELS)
    elif granularity == "coarse":
        labels = list(MACRO_LABELS)
    else:
        raise ValueError(f"granularity must be fine or coarse, got {granularity!r}")
    index = {code: i for i, code in enumerate(labels)}
    k = len(labels)
    joint = np.zeros((k, k), dtype=np.int64)
    alone = np.zeros(k, dtype=np.int64)
    base = np.zeros(k, dtype=np.int64)
    for vid in views:
        if vid not in corpus.view_ids:
            raise KeyError(f"unknown view {vid!r}")
        for post in corpus.posts:
            spans = post.views[vid].spans
            if granularity == "coarse":
                spans = to_coarse(spans, taxonomy)
            cover = np.zeros((post.n_tokens, k), dtype=bool)
            for s in spans:
                cover[s.start:s.end, index[canonical(s.label)]] = True
            c = cover.astype(np.int64)
            joint += c.T @ c
            n_labels = c.sum(axis=1)
            alone += c[n_labels == 1].sum(axis=0)
    base = np.diag(joint).copy()
    with np.errstate(invalid="ignore", divide="ignore"):
        cells = 100.0 * joint / base[:, None]
        cells[np.arange(k), np.arange(k)] = 100.0 * alone / base
    cells[base == 0, :] = np.nan
    return OverlapMatrix(labels, cells, {code: int(base[i]) for i, code in enumerate(labels)})


# -- informative tokens ---------------------------------------------------------

def read_stopwords(stream):
    return frozenset(line.strip().lower() for line in stream if line.strip())


def informative_tokens(corpus, label, k=10, stopwords=frozenset(), views=None):
    """Top-k tokens inside spans of ``label`` by weighted positive normalized PMI.

    Occurrences are lowercased span tokens (one per span containing the
    token, views pooled) minus stopwords. For a token t and label f:
    score = max(0, npmi(t, f)) * log(1 + count(t, f)). Ties go to the
    lexicographically smaller token.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    code = canonical(label)
    views = list(views or corpus.view_ids)
    joint = Counter()
    for vid in views:
        for post in corpus.posts:
            lowered = [t.lower() for t in post.tokens]
            for s in post.views[vid].spans:
                for tok in lowered[s.start:s.end]:
                    if tok not in stopwords:
                        joint[(tok, s.label)] += 1
    label_count = Counter()
    token_count = Counter()
    for (tok, lab), c in joint.items():
        label_count[lab] += c
        token_count[tok] += c
    if label_count[code] == 0:
        raise KeyError(f"label {code} has no span tokens in the corpus")
    total = sum(joint.values())
    scored = []
    for tok in token_count:
        c_tf = joint.get((tok, code), 0)
        if c_tf == 0:
            continue
        p_tf = c_tf / total
        pmi = math.log(p_tf / ((token_count[tok] / total) * (label_count[code] / total)))
        npmi = 1.0 if p_tf == 1.0 else pmi / -math.log(p_tf)
        scored.append((max(0.0, npmi) * math.log(1 + c_tf), tok))
    scored.sort(key=lambda x: (-x[0], x[1]))
    return [(tok, score) for score, tok in scored[:k]]
