"""Label taxonomy: a DAG over fine labels, macro-categories and the root.

The taxonomy drives two things: mapping fine labels onto macro-categories
for the coarse tasks, and partial label credit in soft span scoring.
"""

import io
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from importlib import resources

from .labels import FINE_LABELS, MACRO_LABELS, ROOT, UnknownLabelError, canonical


class TaxonomyError(ValueError):
    pass


@dataclass(frozen=True)
class Taxonomy:
    edges: frozenset  # of (child, parent) code pairs
    root: str = ROOT
    _parents: dict = field(init=False, repr=False, compare=False)
    _macros: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        parents = {}
        for child, parent in sorted(self.edges):
            parents.setdefault(child, set()).add(parent)
        object.__setattr__(self, "_parents", {k: frozenset(v) for k, v in parents.items()})
        _check(self)
        macros = {}
        for code in FINE_LABELS:
            macros[code] = frozenset(a for a in self.ancestors(code) if a in MACRO_LABELS)
        object.__setattr__(self, "_macros", macros)

    @property
    def nodes(self):
        out = {self.root}
        for child, parent in self.edges:
            out.add(child)
            out.add(parent)
        return frozenset(out)

    def parents(self, code):
        """Immediate parents of a label (empty for the root)."""
        return self._parents.get(code, frozenset())

    def ancestors(self, code):
        seen = set()
        stack = list(self.parents(code))
        while stack:
            node = stack.pop()
            if node not in seen:
                seen.add(node)
                stack.extend(self.parents(node))
        return frozenset(seen)


def _check(tax):
    for child, parent in tax.edges:
        if child == parent:
            raise TaxonomyError(f"cycle detected: self-loop on {child}")
        if child == tax.root:
            raise TaxonomyError("the root cannot have a parent")
    try:
        tuple(TopologicalSorter(tax._parents).static_order())
    except CycleError as exc:
        raise TaxonomyError(f"cycle detected: {' -> '.join(exc.args[1])}") from None
    for node in sorted(tax.nodes - {tax.root}):
        if tax.root not in tax.ancestors(node):
            raise TaxonomyError(f"label {node} does not reach {tax.root}")
    for code in FINE_LABELS:
        if not any(a in MACRO_LABELS for a in tax.ancestors(code)):
            raise TaxonomyError(f"fine label {code} has no macro-category ancestor")


def _read_code(text, lineno):
    try:
        return canonical(text)
    except UnknownLabelError:
        raise TaxonomyError(f"line {lineno}: unknown label code {text!r}") from None


def load_taxonomy(source=None):
    """Parse a taxonomy from a text stream of ``CHILD<TAB>PARENT`` lines.

    With no source, the packaged default taxonomy is loaded.
    """
    if source is None:
        text = resources.files(__package__).joinpath("default_taxonomy.tsv").read_text("utf-8")
        source = io.StringIO(text)
    edges = set()
    for lineno, raw in enumerate(source, 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise TaxonomyError(f"line {lineno}: expected CHILD<TAB>PARENT, got {line!r}")
        edges.add((_read_code(parts[0], lineno), _read_code(parts[1], lineno)))
    return Taxonomy(frozenset(edges))


_DEFAULT = None


def default_taxonomy():
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_taxonomy()
    return _DEFAULT


def macro_parents(taxonomy, label):
    """All macro-category ancestors of a fine label (at least one)."""
    code = canonical(label)
    if code not in FINE_LABELS:
        raise UnknownLabelError(f"{label!r} is not a fine fallacy label")
    return taxonomy._macros[code]


def delta(mode, taxonomy, gold, pred, partial=0.5, symmetric=False):
    """Label credit for a gold/predicted label pair.

    ``strict`` gives 1 for an exact match and 0 otherwise. ``soft`` also
    gives ``partial`` when the prediction is an immediate parent of the gold
    label; with ``symmetric`` the reverse direction earns it too.
    """
    gold = canonical(gold)
    pred = canonical(pred)
    if gold == pred:
        return 1.0
    if mode == "strict":
        return 0.0
    if mode != "soft":
        raise ValueError(f"unknown mode {mode!r}")
    if pred in taxonomy.parents(gold):
        return float(partial)
    if symmetric and gold in taxonomy.parents(pred):
        return float(partial)
    return 0.0
