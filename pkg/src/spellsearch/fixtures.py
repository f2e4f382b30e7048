"""Bundled desk-scale fixtures: a demo product catalog and tiny corpora.

The corpora under ``data/`` are small synthetic stand-ins shaped like the
public typo corpora (see README); real corpora plug into the same loaders.
The demo catalog is generated deterministically so any desk-scale run can
reproduce it without shipping a list.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

BRANDS = (
    "contoso", "fabrikam", "northwind", "proseware", "adatum", "woodgrove",
    "tailspin", "wingtip", "lamna", "relecloud", "vanarsdel", "litware",
)

DOMAINS = (
    "payroll", "inventory", "analytics", "helpdesk", "security", "marketing",
    "logistics", "billing", "compliance", "onboarding", "forecasting",
    "translation", "scheduling", "procurement", "survey", "chatbot", "audit",
)

SUFFIXES = (
    "dashboard", "designer", "studio", "manager", "connector", "planner",
    "insights", "toolkit", "assistant", "suite",
)

_CATALOG_SEED = 20230517

_ONSETS = "bdfgklmnprstvz"
_VOWELS = "aeiou"


def _brandable_pool(rng: np.random.Generator, count: int) -> list[list[str]]:
    """Clusters of 4 invented short names differing in two vowel slots.

    Within a cluster, names are >= 2 edits apart, so a one-edit typo never
    collides with a sibling exactly but can land between two of them.
    """
    clusters: list[list[str]] = []
    seen: set[str] = set()
    while len(clusters) < count:
        c1, c2, c3, tail = (
            _ONSETS[rng.integers(len(_ONSETS))] for _ in range(4)
        )
        v_pair = rng.permutation(len(_VOWELS))[:2]
        w_pair = rng.permutation(len(_VOWELS))[:2]
        names = [
            f"{c1}{_VOWELS[v]}{c2}{_VOWELS[w]}{c3}{_VOWELS[(v + w) % 5]}{tail}"
            for v in v_pair
            for w in w_pair
        ]
        if len(set(names)) < 4 or any(nm in seen for nm in names):
            continue
        seen.update(names)
        clusters.append(names)
    return clusters


def _affix_pool(rng: np.random.Generator, count: int) -> list[list[str]]:
    """Pairs (consonant + stem, stem + consonant) sharing a one-deletion
    midpoint: dropping the first character of one or the last character of
    the other yields the same string."""
    pairs: list[list[str]] = []
    seen: set[str] = set()
    while len(pairs) < count:
        stem = "".join(
            _VOWELS[rng.integers(5)] if i % 2 == 0 else _ONSETS[rng.integers(len(_ONSETS))]
            for i in range(6)
        )
        first = _ONSETS[rng.integers(len(_ONSETS))] + stem
        second = stem + _ONSETS[rng.integers(len(_ONSETS))]
        if first in seen or second in seen or first == second:
            continue
        seen.update((first, second))
        pairs.append([first, second])
    return pairs


def demo_catalog(n: int = 200) -> list[str]:
    """First ``n`` names of the fixed demo marketplace catalog.

    Mixes three families: multi-word names from brand/domain/suffix combos,
    invented short brand names in confusable clusters, and affix pairs whose
    typos can be genuinely ambiguous.  Prefix-stable: ``demo_catalog(200)``
    is a prefix of ``demo_catalog(1000)``.
    """
    combos = [
        f"{b} {d} {s}" for b in BRANDS for d in DOMAINS for s in SUFFIXES
    ]
    combos += [f"{d} {s}" for d in DOMAINS for s in SUFFIXES]
    rng = np.random.Generator(np.random.PCG64(_CATALOG_SEED))
    order = rng.permutation(len(combos))
    distinct = [combos[i] for i in order]

    clusters = _brandable_pool(rng, 200)
    affixes = _affix_pool(rng, 350)

    # 50-name blocks: 18 distinctive + 4 clusters of 4 + 8 affix pairs
    names: list[str] = []
    di = ci = ai = 0
    while len(names) < n and di < len(distinct):
        names.extend(distinct[di:di + 18])
        di += 18
        for _ in range(4):
            names.extend(clusters[ci])
            ci += 1
        for _ in range(8):
            names.extend(affixes[ai])
            ai += 1
    if n > len(names):
        raise ValueError(f"demo catalog tops out at {len(names)} names")
    return names[:n]


def fixture_bytes(name: str) -> bytes:
    """Raw bytes of a bundled data file (e.g. ``github_fixture.jsonl``)."""
    return resources.files("spellsearch.data").joinpath(name).read_bytes()


FIXTURE_CORPORA = {
    "github-fixture": ("github_fixture.jsonl", "github-jsonl"),
    "twitter-fixture": ("twitter_fixture.tsv", "twitter-tsv"),
}


def fixture_corpus(dataset_id: str) -> tuple[bytes, str]:
    """(raw bytes, parser format) for a bundled corpus fixture."""
    if dataset_id not in FIXTURE_CORPORA:
        raise KeyError(f"unknown fixture corpus {dataset_id!r}")
    filename, fmt = FIXTURE_CORPORA[dataset_id]
    return fixture_bytes(filename), fmt
