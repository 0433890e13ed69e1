"""Chance-corrected agreement for overlapping span annotations.

Two views of a post are aligned by pairing each unit with at most one unit
of the other view, or leaving it unpaired. The cheapest such alignment is
found exactly as a min-cost assignment on an augmented square matrix. The
disorder of the corpus is compared against the disorder of random
annotations with the same unit counts, lengths and categories, giving

    gamma = 1 - observed / expected

Categorical agreement (gamma_cat) reuses the best alignment and counts
category mismatches among its paired units.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

# large finite stand-in for forbidden cells of the augmented matrix
_FORBIDDEN = 1e12


class AgreementError(ValueError):
    pass


@dataclass(frozen=True)
class Unit:
    start: int
    end: int
    category: str
    owner: str = ""

    @property
    def length(self):
        return self.end - self.start


@dataclass(frozen=True)
class AgreementConfig:
    alpha: float = 1.0
    beta: float = 1.0
    delta_empty: float = 1.0
    resamples: int = 30
    seed: int = 0

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0 or (self.alpha == 0 and self.beta == 0):
            raise AgreementError("alpha and beta must be >= 0 and not both 0")
        if self.resamples < 1:
            raise AgreementError("resamples must be >= 1")
        if self.delta_empty < 0:
            raise AgreementError("delta_empty must be >= 0")

    @property
    def empty_cost(self):
        return (self.alpha + self.beta) * self.delta_empty


@dataclass
class AgreementResult:
    gamma: float
    gamma_cat: float
    observed_disorder: float
    expected_disorder: float
    observed_cat: float
    expected_cat: float
    views: tuple
    config: AgreementConfig
    method: str = "aligned-categorical"
    per_resample: Optional[List[dict]] = field(default=None, repr=False)

    def as_dict(self):
        out = {
            "views": list(self.views),
            "gamma": self.gamma,
            "gamma_cat": self.gamma_cat,
            "observed_disorder": self.observed_disorder,
            "expected_disorder": self.expected_disorder,
            "observed_cat_disorder": self.observed_cat,
            "expected_cat_disorder": self.expected_cat,
            "gamma_cat_method": self.method,
            "config": asdict(self.config),
        }
        if self.per_resample is not None:
            out["per_resample"] = self.per_resample
        return out


def positional_dissimilarity(u, v):
    num = abs(u.start - v.start) + abs(u.end - v.end)
    return (num / (u.length + v.length)) ** 2


def pair_cost(u, v, config):
    d_cat = 0.0 if u.category == v.category else 1.0
    return config.alpha * positional_dissimilarity(u, v) + config.beta * d_cat


def best_alignment(units_a, units_b, config):
    """Cheapest alignment of two unit lists from the same post.

    Returns ``(pairing, disorder)``. ``pairing`` lists ``(i, j)`` index
    pairs where either index may be None for a unit left unpaired.
    Disorder is total cost divided by the number of unitary alignments.
    """
    n, m = len(units_a), len(units_b)
    if n == 0 and m == 0:
        return [], 0.0
    size = n + m
    cost = np.zeros((size, size))
    empty = config.empty_cost
    if n and m:
        cost[:n, :m] = [[pair_cost(u, v, config) for v in units_b] for u in units_a]
    # a_i unpaired: row i, column m + i
    cost[:n, m:] = _FORBIDDEN
    cost[np.arange(n), m + np.arange(n)] = empty
    # b_j unpaired: row n + j, column j
    cost[n:, :m] = _FORBIDDEN
    cost[n + np.arange(m), np.arange(m)] = empty
    rows, cols = linear_sum_assignment(cost)
    pairing = []
    total = 0.0
    for r, c in zip(rows, cols):
        if r < n and c < m:
            pairing.append((int(r), int(c)))
            total += float(cost[r, c])
        elif r < n:
            pairing.append((int(r), None))
            total += empty
        elif c < m:
            pairing.append((None, int(c)))
            total += empty
    pairing.sort(key=lambda p: (p[0] is None, p[0] if p[0] is not None else p[1]))
    return pairing, total / max(1, len(pairing))


def _category_mismatches(pairing, units_a, units_b):
    pairs = [(i, j) for i, j in pairing if i is not None and j is not None]
    return sum(units_a[i].category != units_b[j].category for i, j in pairs), len(pairs)


def _units(post, view_id):
    return [Unit(s.start, s.end, s.label, view_id) for s in post.views[view_id].spans]


def _corpus_disorder(unit_pairs, config):
    """Unit-weighted mean disorder and pooled categorical disorder."""
    weighted = 0.0
    n_units = 0
    mismatches = 0
    n_pairs = 0
    for units_a, units_b in unit_pairs:
        k = len(units_a) + len(units_b)
        if k == 0:
            continue
        pairing, disorder = best_alignment(units_a, units_b, config)
        weighted += k * disorder
        n_units += k
        mm, pp = _category_mismatches(pairing, units_a, units_b)
        mismatches += mm
        n_pairs += pp
    observed = weighted / n_units if n_units else 0.0
    observed_cat = mismatches / n_pairs if n_pairs else 0.0
    return observed, observed_cat


def _resample(posts_units, pools, rng):
    """Random annotations keeping each post's unit counts per view."""
    out = []
    for n_tokens, per_view in posts_units:
        sampled = []
        for view_idx, units in enumerate(per_view):
            lengths, cats = pools[view_idx]
            new = []
            for _ in units:
                length = int(lengths[rng.integers(len(lengths))])
                length = min(length, n_tokens)
                start = int(rng.integers(0, n_tokens - length + 1))
                cat = cats[rng.integers(len(cats))]
                new.append(Unit(start, start + length, cat))
            sampled.append(new)
        out.append(tuple(sampled))
    return out


def gamma(corpus, views=None, config=None, keep_resamples=False):
    """Gamma and gamma_cat agreement between two views of a corpus."""
    config = config or AgreementConfig()
    views = tuple(views or corpus.view_ids[:2])
    if len(views) != 2 or len(corpus.view_ids) < 2:
        raise AgreementError("agreement needs exactly two views")
    for v in views:
        if v not in corpus.view_ids:
            raise AgreementError(f"unknown view {v!r}")
    va, vb = views
    posts_units = [(post.n_tokens, (_units(post, va), _units(post, vb))) for post in corpus.posts]
    observed, observed_cat = _corpus_disorder([pu for _, pu in posts_units], config)

    # empirical pools, in corpus order so relabeling categories cannot change the draws
    pools = []
    for idx in range(2):
        units = [u for _, pu in posts_units for u in pu[idx]]
        pools.append((np.array([u.length for u in units], dtype=np.int64),
                      [u.category for u in units]))

    n_units = sum(len(pu[0]) + len(pu[1]) for _, pu in posts_units)
    if n_units == 0:
        return AgreementResult(1.0, 1.0, 0.0, 0.0, 0.0, 0.0, views, config,
                               per_resample=[] if keep_resamples else None)
    # a view without units has empty pools; its counts are zero so nothing is drawn
    pools = [(lengths, cats) if len(cats) else (np.array([1]), [""]) for lengths, cats in pools]

    seeds = np.random.SeedSequence(config.seed).spawn(config.resamples)
    expected_runs = []
    for seq in seeds:
        rng = np.random.default_rng(seq)
        sampled = _resample(posts_units, pools, rng)
        expected_runs.append(_corpus_disorder(sampled, config))
    expected = math.fsum(e for e, _ in expected_runs) / len(expected_runs)
    expected_cat = math.fsum(c for _, c in expected_runs) / len(expected_runs)

    return AgreementResult(
        _ratio(observed, expected, "gamma"),
        _ratio(observed_cat, expected_cat, "gamma_cat"),
        observed, expected, observed_cat, expected_cat, views, config,
        per_resample=([{"disorder": e, "cat_disorder": c} for e, c in expected_runs]
                      if keep_resamples else None),
    )


def _ratio(observed, expected, name):
    if observed == 0:
        return 1.0
    if expected == 0:
        raise AgreementError(f"{name}: expected disorder is 0 while observed is {observed}; "
                             "the corpus is degenerate")
    return 1.0 - observed / expected
