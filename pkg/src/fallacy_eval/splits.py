"""Deterministic k-fold splits with a train/dev subdivision.

The shuffle is fully specified so that any implementation reproduces the
same folds: post ids are sorted by code point, then shuffled with
Fisher-Yates driven by xoshiro256** whose state is filled from splitmix64
seeded with the user seed. Bounded draws use rejection sampling.
"""

import json
import os
from dataclasses import dataclass, field
from typing import List, Optional

MASK64 = (1 << 64) - 1
PRNG_NAME = "xoshiro256** seeded by splitmix64; Fisher-Yates from the last index down"


class SplitError(ValueError):
    pass


class SplitMix64:
    def __init__(self, seed):
        self.state = seed & MASK64

    def next(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256:
    """xoshiro256** 64-bit generator."""

    def __init__(self, seed):
        sm = SplitMix64(seed)
        self.s = [sm.next() for _ in range(4)]

    def next(self):
        s = self.s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def below(self, n):
        """Uniform integer in [0, n) without modulo bias."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next()
            if x < limit:
                return x % n


def shuffle(items, rng):
    items = list(items)
    for i in range(len(items) - 1, 0, -1):
        j = rng.below(i + 1)
        items[i], items[j] = items[j], items[i]
    return items


def _round_half_up(x):
    return int(x + 0.5)


@dataclass
class Fold:
    train: List[str]
    dev: List[str]
    test: List[str]


@dataclass
class FoldSet:
    k: int
    seed: int
    stratify: Optional[str]
    folds: List[Fold] = field(default_factory=list)

    def manifest(self):
        return {
            "k": self.k,
            "seed": self.seed,
            "stratify": self.stratify,
            "prng": PRNG_NAME,
            "dev_fraction": 0.2,
            "folds": [{"fold": i + 1, "train": len(f.train), "dev": len(f.dev),
                       "test": len(f.test)} for i, f in enumerate(self.folds)],
        }

    def write(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        for i, fold in enumerate(self.folds, 1):
            for part in ("train", "dev", "test"):
                path = os.path.join(out_dir, f"fold{i}.{part}.ids")
                with open(path, "w", encoding="utf-8", newline="\n") as fh:
                    fh.writelines(pid + "\n" for pid in getattr(fold, part))
        with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
            json.dump(self.manifest(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _cut(items, k, offset=0):
    """Split into k chunks whose sizes differ by at most one.

    The ``len % k`` larger chunks start at fold ``offset`` (cyclically).
    """
    n = len(items)
    base, extra = divmod(n, k)
    sizes = [base] * k
    for r in range(extra):
        sizes[(offset + r) % k] += 1
    chunks = []
    pos = 0
    for size in sizes:
        chunks.append(items[pos:pos + size])
        pos += size
    return chunks


def make_folds(corpus_or_ids, k=5, seed=0, stratify=None):
    """k-fold test partition; each fold's remaining ids split 80/20 into train/dev.

    ``stratify="topic"`` shuffles and cuts every topic separately (topics in
    sorted order) and merges the chunks, so per-topic test counts differ by
    at most one across folds.
    """
    if k < 2:
        raise SplitError("k must be >= 2")
    if hasattr(corpus_or_ids, "posts"):
        posts = corpus_or_ids.posts
        ids = [p.id for p in posts]
        strata_of = {p.id: getattr(p, stratify) for p in posts} if stratify else None
    else:
        ids = list(corpus_or_ids)
        if stratify:
            raise SplitError("stratification needs a corpus")
        strata_of = None
    if len(set(ids)) != len(ids):
        raise SplitError("post ids are not unique")
    if len(ids) < k:
        raise SplitError(f"k={k} is larger than the number of posts ({len(ids)})")

    rng = Xoshiro256(seed)
    if strata_of is None:
        order = shuffle(sorted(ids), rng)
        chunks = _cut(order, k)
    else:
        groups = {}
        for pid in sorted(ids):
            groups.setdefault(strata_of[pid], []).append(pid)
        order = []
        chunks = [[] for _ in range(k)]
        offset = 0
        for name in sorted(groups):
            members = groups[name]
            if len(members) < k:
                raise SplitError(f"stratum {name!r} has {len(members)} posts, fewer than k={k}")
            shuffled = shuffle(members, rng)
            order.extend(shuffled)
            for i, chunk in enumerate(_cut(shuffled, k, offset)):
                chunks[i].extend(chunk)
            offset = (offset + len(members) % k) % k

    folds = []
    for i in range(k):
        test = set(chunks[i])
        pool = [pid for pid in order if pid not in test]
        n_dev = _round_half_up(0.2 * len(pool))
        cut = len(pool) - n_dev
        folds.append(Fold(train=pool[:cut], dev=pool[cut:], test=list(chunks[i])))
    return FoldSet(k, seed, stratify, folds)


def read_ids(path):
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\r\n") for line in fh if line.strip()]


def read_test_folds(directory):
    """Test id lists ``fold1.test.ids``, ``fold2.test.ids``, ... from a split directory."""
    folds = []
    i = 1
    while os.path.exists(os.path.join(directory, f"fold{i}.test.ids")):
        folds.append(read_ids(os.path.join(directory, f"fold{i}.test.ids")))
        i += 1
    if not folds:
        raise FileNotFoundError(f"no fold<i>.test.ids files in {directory}")
    return folds
