"""Domain types for multi-view span annotations.

Constructors do not enforce the annotation invariants; corpora read from
disk may be invalid and ``formats.validate`` reports what is wrong with them.
"""

from dataclasses import dataclass, field
from typing import Mapping, Optional, Tuple


@dataclass(frozen=True, order=True)
class FallacySpan:
    """Half-open token interval ``[start, end)`` carrying one label code."""

    start: int
    end: int
    label: str

    def __len__(self):
        return self.end - self.start

    def overlaps(self, other):
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class View:
    annotator_id: str
    spans: Tuple[FallacySpan, ...] = ()

    def normalized(self):
        return View(self.annotator_id, tuple(sorted(set(self.spans))))


@dataclass(frozen=True)
class Post:
    id: str
    tokens: Tuple[str, ...]
    views: Mapping[str, View]
    topic: str = ""
    date: str = ""

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "views", dict(self.views))

    def __hash__(self):
        return hash((self.id, self.tokens))

    @property
    def n_tokens(self):
        return len(self.tokens)

    def normalized(self):
        return Post(self.id, self.tokens, {k: v.normalized() for k, v in self.views.items()},
                    self.topic, self.date)


@dataclass(frozen=True)
class Corpus:
    posts: Tuple[Post, ...] = ()
    view_ids: Tuple[str, ...] = ()
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "posts", tuple(self.posts))
        object.__setattr__(self, "view_ids", tuple(self.view_ids))
        object.__setattr__(self, "_index", {p.id: p for p in self.posts})

    def __len__(self):
        return len(self.posts)

    def __iter__(self):
        return iter(self.posts)

    def __getitem__(self, post_id) -> Post:
        return self._index[post_id]

    def __contains__(self, post_id):
        return post_id in self._index

    @property
    def ids(self):
        return [p.id for p in self.posts]

    def normalized(self):
        """Same corpus with spans in every view sorted by (start, end, label)."""
        return Corpus(tuple(p.normalized() for p in self.posts), self.view_ids)

    def subset(self, ids):
        keep = set(ids)
        return Corpus(tuple(p for p in self.posts if p.id in keep), self.view_ids)

    def spans(self, view_id):
        """Iterate ``(post_id, span)`` pairs of one view over the whole corpus."""
        for post in self.posts:
            view = post.views.get(view_id)
            if view is not None:
                for span in view.spans:
                    yield post.id, span


@dataclass(frozen=True)
class Prediction:
    """System output for one post.

    Exactly one of ``views`` (one span set per gold view), ``spans``
    (a single span set compared against every gold view) or ``labels``
    (post-level label set) is set.
    """

    post_id: str
    views: Optional[Mapping[str, Tuple[FallacySpan, ...]]] = None
    spans: Optional[Tuple[FallacySpan, ...]] = None
    labels: Optional[frozenset] = None

    def spans_for(self, view_id):
        if self.views is not None:
            if view_id not in self.views:
                raise KeyError(view_id)
            return self.views[view_id]
        if self.spans is not None:
            return self.spans
        return None
