"""Label registry: the 20 fallacy types, the 3 macro-categories and the root."""

import re

FINE_LABELS = {
    "AH": "Ad hominem",
    "AA": "Appeal to authority",
    "AE": "Appeal to emotion",
    "CO": "Causal oversimplification",
    "CP": "Cherry picking",
    "CR": "Circular reasoning",
    "DO": "Doubt",
    "EP": "Evading the burden of proof",
    "FA": "False analogy",
    "FD": "False dilemma",
    "FW": "Flag waving",
    "HG": "Hasty generalization",
    "LL": "Loaded language",
    "NC": "Name calling or labeling",
    "RH": "Red herring",
    "SS": "Slippery slope",
    "SL": "Slogan",
    "ST": "Strawman",
    "TC": "Thought-terminating cliché",
    "VA": "Vagueness",
}

MACRO_LABELS = {
    "INS": "Insufficient proof",
    "SIM": "Simplification",
    "DIS": "Distraction",
}

ROOT = "ROOT"

ALL_LABELS = {**FINE_LABELS, **MACRO_LABELS, ROOT: "Fallacy"}

# alternative spellings seen in model outputs
_ALIASES = {
    "name calling or labelling": "NC",
    "name calling": "NC",
    "thought terminating cliche": "TC",
    "thought-terminating cliche": "TC",
    "evading the burden of proof": "EP",
    "hasty generalisation": "HG",
}


class UnknownLabelError(ValueError):
    pass


def _norm(text):
    return re.sub(r"\s+", " ", text.strip().lower())


_LOOKUP = {}
for _code, _name in ALL_LABELS.items():
    _LOOKUP[_code.lower()] = _code
    _LOOKUP[_norm(_name)] = _code
for _alias, _code in _ALIASES.items():
    _LOOKUP[_norm(_alias)] = _code


def canonical(label: str) -> str:
    """Return the internal code for a label given as a code or a long name.

    Matching is case-insensitive and whitespace-tolerant.

    >>> canonical("loaded Language")
    'LL'
    >>> canonical("va")
    'VA'
    """
    if not isinstance(label, str):
        raise UnknownLabelError(f"label must be a string, got {label!r}")
    code = _LOOKUP.get(_norm(label))
    if code is None:
        raise UnknownLabelError(f"unknown label {label!r}")
    return code


def try_canonical(label):
    """Like canonical() but returns None for unknown labels."""
    try:
        return canonical(label)
    except UnknownLabelError:
        return None


def is_fine(code: str) -> bool:
    return code in FINE_LABELS


def is_macro(code: str) -> bool:
    return code in MACRO_LABELS


def display_name(code: str) -> str:
    return ALL_LABELS[canonical(code)]
