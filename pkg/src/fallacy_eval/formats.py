"""Readers and writers for the record (JSON lines) and CoNLL-like formats.

Record format, one JSON object per line::

    {"id": "p1", "topic": "health", "date": "2021-03", "tokens": ["a", "b"],
     "views": {"A1": [{"start": 0, "end": 2, "label": "LL"}], "A2": []}}

CoNLL-like format, one block per post terminated by a blank line::

    # post_id = p1
    # topic = health
    # date = 2021-03
    # views = A1 A2
    1<TAB>a<TAB>B-LL<TAB>O
    2<TAB>b<TAB>I-LL<TAB>O

Token indices in the CoNLL format are 1-based; spans are 0-based half-open.
Overlapping spans of different labels are written as ``|``-joined tags.
"""

import enum
import io
import json
import logging
from dataclasses import dataclass

from .corpus import Corpus, FallacySpan, Post, Prediction, View
from .labels import ALL_LABELS, FINE_LABELS, try_canonical

log = logging.getLogger(__name__)


class Kind(str, enum.Enum):
    SAME_LABEL_OVERLAP = "SAME_LABEL_OVERLAP"
    OUT_OF_RANGE = "OUT_OF_RANGE"
    UNKNOWN_LABEL = "UNKNOWN_LABEL"
    VIEW_MISMATCH = "VIEW_MISMATCH"
    BAD_TAG_SEQUENCE = "BAD_TAG_SEQUENCE"
    DUPLICATE_POST_ID = "DUPLICATE_POST_ID"


@dataclass(frozen=True)
class Violation:
    post_id: str
    kind: Kind
    message: str

    def __str__(self):
        return f"{self.post_id}\t{self.kind.value}\t{self.message}"


class FormatError(ValueError):
    """Malformed input. Carries the source line number when known."""

    def __init__(self, message, lineno=None, post_id=None, violations=()):
        self.lineno = lineno
        self.post_id = post_id
        self.violations = list(violations)
        where = []
        if lineno is not None:
            where.append(f"line {lineno}")
        if post_id is not None:
            where.append(f"post {post_id}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


_BAD_TOKEN_CHARS = ("\t", "\n", "\r")


# -- validation ---------------------------------------------------------------

def _span_violations(post, view_id, spans, allow_unknown_fine=False):
    out = []
    n = post.n_tokens
    for s in spans:
        if not (0 <= s.start < s.end <= n):
            out.append(Violation(post.id, Kind.OUT_OF_RANGE,
                                 f"view {view_id}: span ({s.start}, {s.end}, {s.label}) "
                                 f"outside 0..{n}"))
        if s.label not in FINE_LABELS:
            out.append(Violation(post.id, Kind.UNKNOWN_LABEL,
                                 f"view {view_id}: label {s.label!r} is not a fallacy type"))
    by_label = {}
    for s in spans:
        by_label.setdefault(s.label, []).append(s)
    for label in sorted(by_label):
        group = sorted(by_label[label])
        for a, b in zip(group, group[1:]):
            if b.start < a.end:
                out.append(Violation(post.id, Kind.SAME_LABEL_OVERLAP,
                                     f"view {view_id}: spans ({a.start}, {a.end}) and "
                                     f"({b.start}, {b.end}) both labeled {label} overlap"))
    return out


def validate(corpus):
    """Check the structural invariants of a corpus.

    Returns a list of violations sorted by (post_id, kind); empty means valid.
    """
    out = []
    seen = set()
    declared = list(corpus.view_ids)
    for post in corpus.posts:
        if post.id in seen:
            out.append(Violation(post.id, Kind.DUPLICATE_POST_ID, f"post id {post.id!r} repeated"))
        seen.add(post.id)
        if not post.tokens:
            out.append(Violation(post.id, Kind.OUT_OF_RANGE, "post has no tokens"))
        for tok in post.tokens:
            if any(c in tok for c in _BAD_TOKEN_CHARS):
                out.append(Violation(post.id, Kind.OUT_OF_RANGE,
                                     f"token {tok!r} contains a tab or newline"))
        got = list(post.views)
        if sorted(got) != sorted(declared):
            missing = [v for v in declared if v not in post.views]
            extra = [v for v in got if v not in declared]
            parts = []
            if missing:
                parts.append("missing " + ",".join(missing))
            if extra:
                parts.append("undeclared " + ",".join(extra))
            out.append(Violation(post.id, Kind.VIEW_MISMATCH,
                                 f"views {'; '.join(parts)} (declared {','.join(declared)})"))
        for view_id, view in post.views.items():
            out.extend(_span_violations(post, view_id, view.spans))
    out.sort(key=lambda v: (v.post_id, v.kind.value))
    return out


def same_label_overlaps(spans):
    """Number of overlapping same-label span pairs in one span set."""
    count = 0
    by_label = {}
    for s in spans:
        by_label.setdefault(s.label, []).append(s)
    for group in by_label.values():
        group.sort()
        count += sum(1 for a, b in zip(group, group[1:]) if b.start < a.end)
    return count


def _raise_if_invalid(corpus, linenos):
    violations = validate(corpus)
    if violations:
        first = violations[0]
        raise FormatError(f"{first.kind.value}: {first.message}"
                          + (f" (+{len(violations) - 1} more)" if len(violations) > 1 else ""),
                          lineno=linenos.get(first.post_id), post_id=first.post_id,
                          violations=violations)


# -- record format ------------------------------------------------------------

def _label_code(label):
    code = try_canonical(label) if isinstance(label, str) else None
    return code if code is not None else label


def _read_spans(raw, lineno, post_id):
    if not isinstance(raw, list):
        raise FormatError("span list expected", lineno, post_id)
    spans = []
    for item in raw:
        try:
            start, end, label = item["start"], item["end"], item["label"]
        except (TypeError, KeyError):
            raise FormatError(f"span needs start, end and label: {item!r}", lineno, post_id) from None
        if not (isinstance(start, int) and isinstance(end, int)) or isinstance(start, bool):
            raise FormatError(f"span offsets must be integers: {item!r}", lineno, post_id)
        if not isinstance(label, str):
            raise FormatError(f"span label must be a string: {item!r}", lineno, post_id)
        spans.append(FallacySpan(start, end, _label_code(label)))
    return tuple(spans)


def _iter_json_lines(stream):
    for lineno, line in enumerate(stream, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc.msg}", lineno) from None
        if not isinstance(obj, dict) or not isinstance(obj.get("id"), str):
            raise FormatError("record must be an object with a string 'id'", lineno)
        yield lineno, obj


def parse_corpus_records(stream, check=True):
    """Read a corpus from JSON-lines records.

    The declared view order is the key order of the first record. With
    ``check`` the corpus is validated and the first violation is raised as a
    FormatError naming the post and its line.
    """
    posts = []
    view_ids = None
    linenos = {}
    for lineno, obj in _iter_json_lines(stream):
        pid = obj["id"]
        tokens = obj.get("tokens")
        if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
            raise FormatError("'tokens' must be a list of strings", lineno, pid)
        views = obj.get("views")
        if not isinstance(views, dict):
            raise FormatError("'views' must be an object", lineno, pid)
        if view_ids is None:
            view_ids = tuple(views)
        post = Post(pid, tuple(tokens),
                    {vid: View(vid, _read_spans(raw, lineno, pid)) for vid, raw in views.items()},
                    topic=str(obj.get("topic", "")), date=str(obj.get("date", "")))
        posts.append(post)
        linenos.setdefault(pid, lineno)
    corpus = Corpus(tuple(posts), view_ids or ())
    if check:
        _raise_if_invalid(corpus, linenos)
    return corpus


def _span_obj(s):
    return {"start": s.start, "end": s.end, "label": s.label}


def write_corpus_records(corpus, stream=None):
    """Write one JSON record per post; returns the text when no stream is given."""
    own = stream is None
    out = io.StringIO() if own else stream
    for post in corpus.posts:
        obj = {
            "id": post.id,
            "topic": post.topic,
            "date": post.date,
            "tokens": list(post.tokens),
            "views": {vid: [_span_obj(s) for s in post.views[vid].spans]
                      for vid in corpus.view_ids},
        }
        out.write(json.dumps(obj, ensure_ascii=False, separators=(", ", ": ")) + "\n")
    return out.getvalue() if own else None


def parse_predictions(stream):
    """Read prediction records keyed by post id.

    Each record carries ``views`` (paired), ``spans`` (broadcast) or
    ``labels`` (post-level). Labels are canonicalized; unknown labels raise.
    """
    preds = {}
    for lineno, obj in _iter_json_lines(stream):
        pid = obj["id"]
        if pid in preds:
            raise FormatError(f"duplicate prediction for post {pid!r}", lineno, pid)
        kinds = [k for k in ("views", "spans", "labels") if k in obj]
        if len(kinds) != 1:
            raise FormatError("prediction needs exactly one of 'views', 'spans', 'labels'",
                              lineno, pid)
        kind = kinds[0]
        if kind == "views":
            if not isinstance(obj["views"], dict):
                raise FormatError("'views' must be an object", lineno, pid)
            views = {vid: _read_spans(raw, lineno, pid) for vid, raw in obj["views"].items()}
            spans_all = [s for spans in views.values() for s in spans]
            pred = Prediction(pid, views=views)
        elif kind == "spans":
            spans_all = _read_spans(obj["spans"], lineno, pid)
            pred = Prediction(pid, spans=spans_all)
        else:
            raw = obj["labels"]
            if not isinstance(raw, list):
                raise FormatError("'labels' must be a list", lineno, pid)
            spans_all = []
            codes = frozenset(_label_code(x) if isinstance(x, str) else x for x in raw)
            bad = [c for c in codes if c not in ALL_LABELS or c == "ROOT"]
            if bad:
                raise FormatError(f"unknown label {bad[0]!r}", lineno, pid)
            pred = Prediction(pid, labels=codes)
        for s in spans_all:
            if s.label not in ALL_LABELS or s.label == "ROOT":
                raise FormatError(f"unknown label {s.label!r}", lineno, pid)
            if not 0 <= s.start < s.end:
                raise FormatError(f"invalid span ({s.start}, {s.end})", lineno, pid)
        preds[pid] = pred
    return preds


def write_predictions(preds, stream=None):
    own = stream is None
    out = io.StringIO() if own else stream
    for pred in preds.values() if isinstance(preds, dict) else preds:
        obj = {"id": pred.post_id}
        if pred.views is not None:
            obj["views"] = {v: [_span_obj(s) for s in spans] for v, spans in pred.views.items()}
        elif pred.spans is not None:
            obj["spans"] = [_span_obj(s) for s in pred.spans]
        else:
            obj["labels"] = sorted(pred.labels)
        out.write(json.dumps(obj, ensure_ascii=False) + "\n")
    return out.getvalue() if own else None


# -- CoNLL-like format --------------------------------------------------------

def _encode_view(spans, n_tokens):
    tags = [[] for _ in range(n_tokens)]
    for s in sorted(spans, key=lambda s: (s.label, s.start)):
        tags[s.start].append((s.label, "B"))
        for i in range(s.start + 1, s.end):
            tags[i].append((s.label, "I"))
    return ["|".join(f"{bio}-{label}" for label, bio in sorted(t)) if t else "O" for t in tags]


def write_conll(corpus, stream=None):
    """Write the token format. Span order is normalized by construction."""
    own = stream is None
    out = io.StringIO() if own else stream
    for vid in corpus.view_ids:
        if not vid or any(c.isspace() for c in vid):
            raise ValueError(f"view id {vid!r} cannot be written in the CoNLL header")
    for post in corpus.posts:
        out.write(f"# post_id = {post.id}\n")
        if post.topic:
            out.write(f"# topic = {post.topic}\n")
        if post.date:
            out.write(f"# date = {post.date}\n")
        out.write(f"# views = {' '.join(corpus.view_ids)}\n")
        columns = [_encode_view(post.views[vid].spans, post.n_tokens) for vid in corpus.view_ids]
        for i, tok in enumerate(post.tokens):
            if any(c in tok for c in _BAD_TOKEN_CHARS):
                raise ValueError(f"post {post.id}: token {tok!r} contains a tab or newline")
            row = [str(i + 1), tok] + [col[i] for col in columns]
            out.write("\t".join(row) + "\n")
        out.write("\n")
    return out.getvalue() if own else None


class _Block:
    def __init__(self, lineno):
        self.lineno = lineno
        self.meta = {}
        self.rows = []  # (lineno, token, [tag fields])


def _iter_blocks(stream):
    block = None
    for lineno, raw in enumerate(stream, 1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            if block is not None:
                yield block
                block = None
            continue
        if block is None:
            block = _Block(lineno)
        if line.startswith("#") and not block.rows:
            key, sep, value = line[1:].strip().partition(" = ")
            if not sep:
                key, sep, value = line[1:].strip().partition("=")
            if sep:
                block.meta[key.strip()] = value.strip() if key.strip() != "post_id" else value
            continue
        block.rows.append((lineno, line.split("\t")))
    if block is not None:
        yield block


def _decode_column(tags, pid, view_id):
    """Turn one view's tag column into spans, checking the BIO grammar."""
    spans = []
    open_spans = {}  # label -> start index
    for i, (lineno, field) in enumerate(tags):
        current = {}
        if field != "O":
            for tag in field.split("|"):
                bio, dash, label = tag.partition("-")
                if not dash or bio not in ("B", "I") or not label:
                    raise FormatError(f"view {view_id}: malformed tag {tag!r}", lineno, pid,
                                      [Violation(pid, Kind.BAD_TAG_SEQUENCE, f"malformed tag {tag!r}")])
                code = _label_code(label)
                if code in current:
                    raise FormatError(f"view {view_id}: label {label} tagged twice on token {i + 1}",
                                      lineno, pid,
                                      [Violation(pid, Kind.BAD_TAG_SEQUENCE,
                                                 f"duplicate tag for {label} on token {i + 1}")])
                current[code] = bio
        for code, start in list(open_spans.items()):
            if current.get(code) != "I":
                spans.append(FallacySpan(start, i, code))
                del open_spans[code]
        for code, bio in current.items():
            if bio == "B":
                open_spans[code] = i
            elif code not in open_spans:
                msg = f"view {view_id}: I-{code} on token {i + 1} does not continue a {code} span"
                raise FormatError(msg, lineno, pid, [Violation(pid, Kind.BAD_TAG_SEQUENCE, msg)])
    for code, start in open_spans.items():
        spans.append(FallacySpan(start, len(tags), code))
    return tuple(sorted(spans))


def parse_conll(stream, check=True):
    """Read a corpus from the CoNLL-like token format.

    Spans within each view come back in (start, end, label) order.
    """
    posts = []
    view_ids = None
    linenos = {}
    for block in _iter_blocks(stream):
        pid = block.meta.get("post_id")
        if pid is None:
            raise FormatError("post block without '# post_id' header", block.lineno)
        if "views" not in block.meta:
            raise FormatError("post block without '# views' header", block.lineno, pid)
        views = tuple(block.meta["views"].split())
        if view_ids is None:
            view_ids = views
        elif views != view_ids and check:
            raise FormatError(f"views {' '.join(views)} differ from {' '.join(view_ids)}",
                              block.lineno, pid,
                              [Violation(pid, Kind.VIEW_MISMATCH, "view header differs")])
        tokens = []
        columns = [[] for _ in views]
        for k, (lineno, fields) in enumerate(block.rows):
            if len(fields) != 2 + len(views):
                msg = f"expected {2 + len(views)} columns, got {len(fields)}"
                raise FormatError(msg, lineno, pid, [Violation(pid, Kind.VIEW_MISMATCH, msg)])
            if fields[0] != str(k + 1):
                raise FormatError(f"token index {fields[0]!r}, expected {k + 1}", lineno, pid)
            tokens.append(fields[1])
            for col, field in zip(columns, fields[2:]):
                col.append((lineno, field))
        post_views = {vid: View(vid, _decode_column(col, pid, vid))
                      for vid, col in zip(views, columns)}
        posts.append(Post(pid, tuple(tokens), post_views,
                          topic=block.meta.get("topic", ""), date=block.meta.get("date", "")))
        linenos.setdefault(pid, block.lineno)
    corpus = Corpus(tuple(posts), view_ids or ())
    if check:
        _raise_if_invalid(corpus, linenos)
    return corpus


def sniff_format(text):
    """Guess 'records' or 'conll' from the first non-blank line."""
    for line in text.splitlines():
        if line.strip():
            return "records" if line.lstrip().startswith("{") else "conll"
    return "records"


def read_corpus(path, check=True):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    fmt = sniff_format(text)
    parse = parse_corpus_records if fmt == "records" else parse_conll
    return parse(io.StringIO(text), check=check)
