import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from fallacy_eval import Corpus, FallacySpan, Post, View, default_taxonomy  # noqa: E402
from fallacy_eval.labels import FINE_LABELS  # noqa: E402

DATA = Path(__file__).parent / "data"
CODES = sorted(FINE_LABELS)


@pytest.fixture(scope="session")
def taxonomy():
    return default_taxonomy()


@st.composite
def spans_st(draw, n_tokens, max_spans=6, labels=CODES, valid=True):
    """Span lists for one post; with ``valid`` no same-label spans overlap."""
    out = []
    for _ in range(draw(st.integers(0, max_spans))):
        start = draw(st.integers(0, n_tokens - 1))
        end = draw(st.integers(start + 1, n_tokens))
        label = draw(st.sampled_from(labels))
        span = FallacySpan(start, end, label)
        if valid and any(s.label == label and s.overlaps(span) for s in out):
            continue
        out.append(span)
    return tuple(out)


@st.composite
def corpus_st(draw, min_posts=1, max_posts=4, max_tokens=30, views=("A1", "A2"), labels=CODES):
    posts = []
    for i in range(draw(st.integers(min_posts, max_posts))):
        n = draw(st.integers(1, max_tokens))
        tokens = tuple(draw(st.lists(st.sampled_from(["a", "b", "mah", "ciao", "ü", "#tag"]),
                                     min_size=n, max_size=n)))
        post_views = {v: View(v, draw(spans_st(n, labels=labels))) for v in views}
        posts.append(Post(f"p{i}", tokens, post_views,
                          topic=draw(st.sampled_from(["", "health", "climate"])),
                          date=draw(st.sampled_from(["", "2020-01"]))))
    return Corpus(tuple(posts), views)


# -- acceptance summary ---------------------------------------------------------

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
