"""Synthetic multi-view corpora for tests and oracles.

A first view is drawn at random; the second view is a perturbed copy of it
(span boundary jitter, label confusion, span drops and inserts). Same-label
collisions are merged, so generated corpora are always valid.
"""

import json
from dataclasses import asdict, dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .corpus import Corpus, FallacySpan, Post, View
from .labels import FINE_LABELS, canonical
from .scoring import _merge

TOPICS = ("migration", "climate", "health")


class GenConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GenConfig:
    posts: int = 20
    tokens: Tuple[int, int] = (5, 30)
    spans: Tuple[int, int] = (0, 6)
    span_length: Tuple[int, int] = (1, 8)
    labels: Optional[Dict[str, float]] = None  # label -> weight; uniform over fine labels if None
    views: Tuple[str, ...] = ("A1", "A2")
    jitter: float = 0.0
    confusion: float = 0.0
    drop: float = 0.0
    insert: float = 0.0
    vocab: int = 50
    seed: int = 0

    def __post_init__(self):
        for name in ("tokens", "spans", "span_length"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise GenConfigError(f"{name}: empty range ({lo}, {hi})")
            object.__setattr__(self, name, (int(lo), int(hi)))
        if self.tokens[0] < 1 or self.span_length[0] < 1 or self.spans[0] < 0:
            raise GenConfigError("token counts and span lengths must be >= 1")
        if self.span_length[0] > self.tokens[0]:
            raise GenConfigError("minimum span length exceeds minimum post length")
        for name in ("confusion", "drop", "insert"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise GenConfigError(f"{name} must be a probability")
        if self.jitter < 0:
            raise GenConfigError("jitter must be >= 0")
        if self.posts < 0 or self.vocab < 1:
            raise GenConfigError("posts must be >= 0 and vocab >= 1")
        if not self.views:
            raise GenConfigError("at least one view is needed")
        if self.labels is not None:
            labels = {canonical(k): float(v) for k, v in dict(self.labels).items()}
            if any(w < 0 for w in labels.values()) or sum(labels.values()) <= 0:
                raise GenConfigError("label weights must be non-negative with a positive sum")
            for code in labels:
                if code not in FINE_LABELS:
                    raise GenConfigError(f"{code} is not a fine fallacy label")
            object.__setattr__(self, "labels", labels)

    @property
    def label_codes(self):
        return list(self.labels) if self.labels else list(FINE_LABELS)

    @property
    def label_probs(self):
        if not self.labels:
            return np.full(len(FINE_LABELS), 1.0 / len(FINE_LABELS))
        w = np.array(list(self.labels.values()))
        return w / w.sum()

    @classmethod
    def from_json(cls, stream):
        data = json.load(stream)
        for key in ("tokens", "spans", "span_length", "views"):
            if key in data:
                data[key] = tuple(data[key])
        try:
            return cls(**data)
        except TypeError as exc:
            raise GenConfigError(str(exc)) from None

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)


def _random_span(n_tokens, config, rng):
    hi = min(config.span_length[1], n_tokens)
    length = int(rng.integers(config.span_length[0], hi + 1))
    start = int(rng.integers(0, n_tokens - length + 1))
    label = config.label_codes[rng.choice(len(config.label_codes), p=config.label_probs)]
    return FallacySpan(start, start + length, label)


def perturb(spans, n_tokens, config, rng, merge=True):
    """Noisy copy of one post's spans.

    Each span is dropped with probability ``drop``; survivors get boundary
    jitter (Gaussian, sd ``jitter`` tokens, rounded, clipped to the post) and
    with probability ``confusion`` a different label. Each original span then
    adds a fresh random span with probability ``insert``.
    """
    out = []
    codes = config.label_codes
    for s in spans:
        if config.drop and rng.random() < config.drop:
            continue
        start, end, label = s.start, s.end, s.label
        if config.jitter > 0:
            start = start + int(round(rng.normal(0.0, config.jitter)))
            end = end + int(round(rng.normal(0.0, config.jitter)))
            start = min(max(start, 0), n_tokens - 1)
            end = min(max(end, start + 1), n_tokens)
        if config.confusion and rng.random() < config.confusion:
            others = [c for c in codes if c != label] or [c for c in FINE_LABELS if c != label]
            label = others[int(rng.integers(len(others)))]
        out.append(FallacySpan(start, end, label))
    for _ in spans:
        if config.insert and rng.random() < config.insert:
            out.append(_random_span(n_tokens, config, rng))
    return _merge(out) if merge and out else tuple(out)


def _post_rng(config, index):
    return np.random.default_rng(np.random.SeedSequence([config.seed, index]))


def generate(config):
    """Random corpus: the first view is sampled, later views perturb it."""
    posts = []
    for i in range(config.posts):
        rng = _post_rng(config, i)
        n = int(rng.integers(config.tokens[0], config.tokens[1] + 1))
        tokens = tuple(f"w{int(x)}" for x in rng.integers(0, config.vocab, size=n))
        k = int(rng.integers(config.spans[0], config.spans[1] + 1))
        first = _merge([_random_span(n, config, rng) for _ in range(k)]) if k else ()
        views = {config.views[0]: View(config.views[0], first)}
        for vid in config.views[1:]:
            views[vid] = View(vid, perturb(first, n, config, rng))
        topic = TOPICS[i % len(TOPICS)]
        date = f"{2019 + (i // 12) % 4}-{i % 12 + 1:02d}"
        posts.append(Post(f"p{i:05d}", tokens, views, topic=topic, date=date))
    return Corpus(tuple(posts), config.views)
