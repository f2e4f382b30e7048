"""Empirical typo statistics: which edits happen, to which keys, where.

A :class:`StatsModel` bundles, for one source dataset, the distribution over
edit types, per-key statistics (which key gets deleted/inserted, which key
substitutes/swaps with which), and a binned histogram of normalized edit
positions.  Models can be built from classified edit events, constructed
synthetically (uniform or keyboard-adjacency), serialized, and mixed.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .corpus import Alphabet, DEFAULT_ALPHABET, EditEvent, EditType, EDIT_TYPES

SUM_TOL = 1e-9


class StatsError(Exception):
    """Raised for empty inputs, malformed stats files, or bad fusion specs."""


@dataclass
class KeyLookup:
    """Result of a per-key statistics lookup.

    ``value`` is a distribution over the alphabet for substitution,
    transposition, and replication, and a scalar marginal probability for
    deletion/insertion.  ``fallback`` marks synthesized uniform rows for
    (type, key) combinations with no observations.
    """

    value: Union[np.ndarray, float]
    fallback: bool


def _uniform(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def _check_dist(p: np.ndarray, what: str) -> None:
    if np.any(p < 0):
        raise StatsError(f"{what} has negative mass")
    if abs(float(p.sum()) - 1.0) > SUM_TOL:
        raise StatsError(f"{what} sums to {p.sum()!r}, not 1")


class StatsModel:
    """Typo statistics for one dataset over a fixed alphabet.

    Immutable after construction; all stored distributions sum to 1 within
    1e-9.  Replication rows are a point mass on the key itself (duplicating
    a character admits no other key), so they are synthesized on lookup.
    """

    def __init__(
        self,
        dataset_id: str,
        alphabet: Alphabet,
        bins: int,
        error_types: np.ndarray,
        deletion_marginal: np.ndarray,
        insertion_marginal: np.ndarray,
        substitution_table: np.ndarray,
        transposition_table: np.ndarray,
        position: np.ndarray,
        deletion_fallback: bool = False,
        insertion_fallback: bool = False,
        substitution_row_fallback: np.ndarray | None = None,
        transposition_row_fallback: np.ndarray | None = None,
        position_fallback: np.ndarray | None = None,
        event_count: int = 0,
    ):
        k = len(alphabet)
        if bins < 2:
            raise StatsError("bins must be >= 2")
        self.dataset_id = dataset_id
        self.alphabet = alphabet
        self.bins = bins
        self.event_count = event_count
        self.error_types = np.asarray(error_types, dtype=float)
        self.deletion_marginal = np.asarray(deletion_marginal, dtype=float)
        self.insertion_marginal = np.asarray(insertion_marginal, dtype=float)
        self.substitution_table = np.asarray(substitution_table, dtype=float)
        self.transposition_table = np.asarray(transposition_table, dtype=float)
        self.position = np.asarray(position, dtype=float)
        self.deletion_fallback = bool(deletion_fallback)
        self.insertion_fallback = bool(insertion_fallback)
        self.substitution_row_fallback = (
            np.zeros(k, dtype=bool)
            if substitution_row_fallback is None
            else np.asarray(substitution_row_fallback, dtype=bool)
        )
        self.transposition_row_fallback = (
            np.zeros(k, dtype=bool)
            if transposition_row_fallback is None
            else np.asarray(transposition_row_fallback, dtype=bool)
        )
        self.position_fallback = (
            np.zeros(len(EDIT_TYPES), dtype=bool)
            if position_fallback is None
            else np.asarray(position_fallback, dtype=bool)
        )
        self._validate()
        for a in (
            self.error_types,
            self.deletion_marginal,
            self.insertion_marginal,
            self.substitution_table,
            self.transposition_table,
            self.position,
        ):
            a.setflags(write=False)

    def _validate(self) -> None:
        k = len(self.alphabet)
        if self.error_types.shape != (len(EDIT_TYPES),):
            raise StatsError("error_types must have one entry per edit type")
        _check_dist(self.error_types, "error type distribution")
        if self.deletion_marginal.shape != (k,) or self.insertion_marginal.shape != (k,):
            raise StatsError("key marginals must cover the alphabet")
        _check_dist(self.deletion_marginal, "deletion marginal")
        _check_dist(self.insertion_marginal, "insertion marginal")
        for name, table in (
            ("substitution", self.substitution_table),
            ("transposition", self.transposition_table),
        ):
            if table.shape != (k, k):
                raise StatsError(f"{name} table must be |K| x |K|")
            for row in range(k):
                _check_dist(table[row], f"{name} row {self.alphabet.chars[row]!r}")
        if self.position.shape != (len(EDIT_TYPES), self.bins):
            raise StatsError("position histogram must be (|T|, bins)")
        for t in range(len(EDIT_TYPES)):
            _check_dist(self.position[t], f"position histogram for {EDIT_TYPES[t].value}")

    @property
    def bin_edges(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.bins + 1)

    def type_probability(self, edit_type: EditType) -> float:
        return float(self.error_types[EDIT_TYPES.index(edit_type)])


TYPE_INDEX = {t: i for i, t in enumerate(EDIT_TYPES)}


def build_stats(
    events: Sequence[EditEvent],
    alphabet: Alphabet = DEFAULT_ALPHABET,
    bins: int = 10,
) -> StatsModel:
    """Estimate a StatsModel from classified edit events (weighted counts).

    Types with no events get uniform fallback key rows / position histograms,
    flagged as such.  Raises ``StatsError`` on an empty event list.
    """
    if not events:
        raise StatsError("cannot build statistics from an empty event list")
    k = len(alphabet)
    n_types = len(EDIT_TYPES)
    sources = {e.source for e in events}
    if len(sources) > 1:
        raise StatsError(f"events mix dataset ids: {sorted(sources)}")
    dataset_id = events[0].source

    type_counts = np.zeros(n_types, dtype=np.int64)
    del_counts = np.zeros(k, dtype=np.int64)
    ins_counts = np.zeros(k, dtype=np.int64)
    sub_counts = np.zeros((k, k), dtype=np.int64)
    trans_counts = np.zeros((k, k), dtype=np.int64)
    pos_values: list[list[float]] = [[] for _ in range(n_types)]
    pos_weights: list[list[int]] = [[] for _ in range(n_types)]

    for e in events:
        ti = TYPE_INDEX[e.edit_type]
        w = e.weight
        if e.key not in alphabet:
            raise StatsError(f"key {e.key!r} outside the alphabet")
        ki = alphabet.index[e.key]
        type_counts[ti] += w
        if e.edit_type is EditType.DELETION:
            del_counts[ki] += w
        elif e.edit_type is EditType.INSERTION:
            ins_counts[alphabet.index[e.other_key]] += w
        elif e.edit_type is EditType.SUBSTITUTION:
            sub_counts[ki, alphabet.index[e.other_key]] += w
        elif e.edit_type is EditType.TRANSPOSITION:
            trans_counts[ki, alphabet.index[e.other_key]] += w
        pos_values[ti].append(e.position_rel)
        pos_weights[ti].append(w)

    error_types = type_counts / type_counts.sum()

    def marginal(counts: np.ndarray) -> tuple[np.ndarray, bool]:
        total = counts.sum()
        if total == 0:
            return _uniform(k), True
        return counts / total, False

    def table(counts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        rows = np.empty((k, k))
        flags = np.zeros(k, dtype=bool)
        for r in range(k):
            total = counts[r].sum()
            if total == 0:
                rows[r] = _uniform(k)
                flags[r] = True
            else:
                rows[r] = counts[r] / total
        return rows, flags

    del_marg, del_fb = marginal(del_counts)
    ins_marg, ins_fb = marginal(ins_counts)
    sub_table, sub_fb = table(sub_counts)
    trans_table, trans_fb = table(trans_counts)

    position = np.empty((n_types, bins))
    pos_fb = np.zeros(n_types, dtype=bool)
    for t in range(n_types):
        if not pos_values[t]:
            position[t] = _uniform(bins)
            pos_fb[t] = True
        else:
            hist, _ = np.histogram(
                pos_values[t], bins=bins, range=(0.0, 1.0),
                weights=np.asarray(pos_weights[t], dtype=np.int64),
            )
            position[t] = hist / hist.sum()

    return StatsModel(
        dataset_id=dataset_id,
        alphabet=alphabet,
        bins=bins,
        error_types=error_types,
        deletion_marginal=del_marg,
        insertion_marginal=ins_marg,
        substitution_table=sub_table,
        transposition_table=trans_table,
        position=position,
        deletion_fallback=del_fb,
        insertion_fallback=ins_fb,
        substitution_row_fallback=sub_fb,
        transposition_row_fallback=trans_fb,
        position_fallback=pos_fb,
        event_count=int(sum(e.weight for e in events)),
    )


def uniform_stats(
    alphabet: Alphabet = DEFAULT_ALPHABET,
    bins: int = 10,
    dataset_id: str = "uniform",
) -> StatsModel:
    """Fully uniform statistics: every type, key, and position equally likely."""
    k = len(alphabet)
    n_types = len(EDIT_TYPES)
    return StatsModel(
        dataset_id=dataset_id,
        alphabet=alphabet,
        bins=bins,
        error_types=_uniform(n_types),
        deletion_marginal=_uniform(k),
        insertion_marginal=_uniform(k),
        substitution_table=np.tile(_uniform(k), (k, 1)),
        transposition_table=np.tile(_uniform(k), (k, 1)),
        position=np.tile(_uniform(bins), (n_types, 1)),
        event_count=0,
    )


# ---------------------------------------------------------------------------
# Keyboard adjacency

# Standard staggered QWERTY: each row is shifted right relative to the row
# above it, so key (r, c) sits physically between (r-1, c) and (r-1, c+1).
QWERTY_ROWS = ("1234567890", "qwertyuiop", "asdfghjkl", "zxcvbnm")


def qwerty_neighbors(rows: Sequence[str] = QWERTY_ROWS) -> dict[str, set[str]]:
    """Keys at physical distance one on a staggered keyboard layout."""
    coord = {}
    for r, row in enumerate(rows):
        for c, ch in enumerate(row):
            coord[ch] = (r, c)
    neighbors: dict[str, set[str]] = {ch: set() for ch in coord}
    for ch, (r, c) in coord.items():
        candidates = [
            (r, c - 1), (r, c + 1),
            (r - 1, c), (r - 1, c + 1),
            (r + 1, c), (r + 1, c - 1),
        ]
        for rr, cc in candidates:
            if 0 <= rr < len(rows) and 0 <= cc < len(rows[rr]):
                neighbors[ch].add(rows[rr][cc])
    return neighbors


def qwerty_stats(
    alphabet: Alphabet = DEFAULT_ALPHABET,
    layout: Sequence[str] = QWERTY_ROWS,
    bins: int = 10,
    dataset_id: str = "qwerty",
) -> StatsModel:
    """Uniform statistics except substitutions are limited to adjacent keys.

    The substitution row for a key spreads equal weight over its physical
    neighbors and zero elsewhere.  Keys absent from the layout (space) get a
    flagged uniform fallback row.
    """
    base = uniform_stats(alphabet, bins, dataset_id)
    k = len(alphabet)
    nbr = qwerty_neighbors(layout)
    sub_table = np.zeros((k, k))
    sub_fb = np.zeros(k, dtype=bool)
    for i, ch in enumerate(alphabet.chars):
        hood = [n for n in nbr.get(ch, ()) if n in alphabet]
        if hood:
            for n in hood:
                sub_table[i, alphabet.index[n]] = 1.0 / len(hood)
        else:
            sub_table[i] = _uniform(k)
            sub_fb[i] = True
    return StatsModel(
        dataset_id=dataset_id,
        alphabet=alphabet,
        bins=bins,
        error_types=base.error_types,
        deletion_marginal=base.deletion_marginal,
        insertion_marginal=base.insertion_marginal,
        substitution_table=sub_table,
        transposition_table=base.transposition_table,
        position=base.position,
        substitution_row_fallback=sub_fb,
        event_count=0,
    )


# ---------------------------------------------------------------------------
# Lookup and sampling

def lookup_key_dist(
    stats: StatsModel, edit_type: EditType, key: str
) -> KeyLookup:
    """Per-key statistics for one edit type.

    Scalar marginal for deletion/insertion, a distribution over the alphabet
    otherwise.  Replication is always a point mass on the key itself.
    """
    if key not in stats.alphabet:
        raise StatsError(f"key {key!r} outside the alphabet")
    ki = stats.alphabet.index[key]
    if edit_type is EditType.DELETION:
        return KeyLookup(float(stats.deletion_marginal[ki]), stats.deletion_fallback)
    if edit_type is EditType.INSERTION:
        return KeyLookup(float(stats.insertion_marginal[ki]), stats.insertion_fallback)
    if edit_type is EditType.REPLICATION:
        row = np.zeros(len(stats.alphabet))
        row[ki] = 1.0
        return KeyLookup(row, False)
    if edit_type is EditType.SUBSTITUTION:
        return KeyLookup(
            stats.substitution_table[ki].copy(),
            bool(stats.substitution_row_fallback[ki]),
        )
    if edit_type is EditType.TRANSPOSITION:
        return KeyLookup(
            stats.transposition_table[ki].copy(),
            bool(stats.transposition_row_fallback[ki]),
        )
    raise ValueError(f"unknown edit type {edit_type}")


def sample_position(
    stats: StatsModel,
    edit_type: EditType,
    string_length: int,
    rng: np.random.Generator,
) -> int:
    """Draw a zero-based edit index for a string of the given length.

    Samples a histogram bin, a uniform real within it, then rounds
    r * (length - 1) to the nearest index.
    """
    if string_length < 1:
        raise ValueError("string_length must be >= 1")
    probs = stats.position[TYPE_INDEX[edit_type]]
    edges = stats.bin_edges
    b = _choice_from(probs, rng)
    r = edges[b] + rng.random() * (edges[b + 1] - edges[b])
    idx = int(np.floor(r * (string_length - 1) + 0.5))
    return min(max(idx, 0), string_length - 1)


def _choice_from(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw consuming exactly one uniform."""
    u = rng.random()
    cum = 0.0
    for i, p in enumerate(probs):
        cum += p
        if u < cum:
            return i
    return len(probs) - 1


def sample_edit_type(stats: StatsModel, rng: np.random.Generator) -> EditType:
    return EDIT_TYPES[_choice_from(stats.error_types, rng)]


# ---------------------------------------------------------------------------
# Fusion

@dataclass
class FusionSpec:
    """Datasets and their mixture weights; weights must sum to 1."""

    components: list[tuple[StatsModel, float]]

    def __post_init__(self):
        if not self.components:
            raise StatsError("fusion spec needs at least one component")
        weights = np.array([w for _, w in self.components], dtype=float)
        if np.any(weights < 0):
            raise StatsError("fusion weights must be non-negative")
        if abs(float(weights.sum()) - 1.0) > SUM_TOL:
            raise StatsError(f"fusion weights sum to {weights.sum()!r}, not 1")


class FusionSelector:
    """Per-draw dataset selector for mixture generation.

    Every ``pick`` consumes exactly one uniform draw, so a degenerate
    mixture with one component reproduces single-dataset generation
    bit-for-bit.
    """

    def __init__(self, spec: FusionSpec):
        self.models = [m for m, _ in spec.components]
        self.weights = np.array([w for _, w in spec.components], dtype=float)
        self.strategy_id = "+".join(
            f"{m.dataset_id}:{w:g}" for m, w in spec.components
        )

    def pick(self, rng: np.random.Generator) -> StatsModel:
        return self.models[_choice_from(self.weights, rng)]


def fuse(spec: FusionSpec) -> FusionSelector:
    """Build a selector that draws each sample's source dataset ~ weights."""
    return FusionSelector(spec)


def as_selector(stats: Union[StatsModel, FusionSelector]) -> FusionSelector:
    if isinstance(stats, FusionSelector):
        return stats
    return FusionSelector(FusionSpec([(stats, 1.0)]))


# ---------------------------------------------------------------------------
# Serialization

STATS_FORMAT = "spellsearch-stats"
STATS_VERSION = 1


def save_stats(stats: StatsModel) -> bytes:
    """Serialize to a human-readable JSON tree with round-trip-exact floats."""
    chars = stats.alphabet.chars
    doc = {
        "format": STATS_FORMAT,
        "version": STATS_VERSION,
        "dataset_id": stats.dataset_id,
        "alphabet": chars,
        "bins": stats.bins,
        "event_count": stats.event_count,
        "error_types": {
            t.value: stats.error_types[i] for i, t in enumerate(EDIT_TYPES)
        },
        "key_stats": {
            "deletion": {
                "fallback": stats.deletion_fallback,
                "p": {c: stats.deletion_marginal[i] for i, c in enumerate(chars)},
            },
            "insertion": {
                "fallback": stats.insertion_fallback,
                "p": {c: stats.insertion_marginal[i] for i, c in enumerate(chars)},
            },
            "substitution": {
                "rows": {
                    c: {
                        "fallback": bool(stats.substitution_row_fallback[i]),
                        "p": {
                            c2: stats.substitution_table[i, j]
                            for j, c2 in enumerate(chars)
                        },
                    }
                    for i, c in enumerate(chars)
                }
            },
            "transposition": {
                "rows": {
                    c: {
                        "fallback": bool(stats.transposition_row_fallback[i]),
                        "p": {
                            c2: stats.transposition_table[i, j]
                            for j, c2 in enumerate(chars)
                        },
                    }
                    for i, c in enumerate(chars)
                }
            },
        },
        "position": {
            t.value: {
                "fallback": bool(stats.position_fallback[i]),
                "p": list(stats.position[i]),
            }
            for i, t in enumerate(EDIT_TYPES)
        },
    }
    return json.dumps(doc, indent=1).encode("utf-8")


def load_stats(data: bytes) -> StatsModel:
    """Load a stats file; missing per-type sections become flagged fallbacks."""
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise StatsError(f"unreadable stats file: {exc}") from exc
    if doc.get("format") != STATS_FORMAT:
        raise StatsError("not a stats file")
    if doc.get("version") != STATS_VERSION:
        raise StatsError(f"unsupported stats version {doc.get('version')!r}")
    alphabet = Alphabet(doc["alphabet"])
    k = len(alphabet)
    bins = int(doc["bins"])
    chars = alphabet.chars

    raw_types = doc.get("error_types", {})
    error_types = np.array(
        [float(raw_types.get(t.value, 0.0)) for t in EDIT_TYPES]
    )

    key_stats = doc.get("key_stats", {})

    def read_marginal(name: str) -> tuple[np.ndarray, bool]:
        section = key_stats.get(name)
        if section is None:
            return _uniform(k), True
        p = np.array([float(section["p"].get(c, 0.0)) for c in chars])
        return p, bool(section.get("fallback", False))

    def read_table(name: str) -> tuple[np.ndarray, np.ndarray]:
        rows = np.empty((k, k))
        flags = np.zeros(k, dtype=bool)
        section = key_stats.get(name)
        raw_rows = {} if section is None else section.get("rows", {})
        for i, c in enumerate(chars):
            row = raw_rows.get(c)
            if row is None:
                rows[i] = _uniform(k)
                flags[i] = True
            else:
                rows[i] = [float(row["p"].get(c2, 0.0)) for c2 in chars]
                flags[i] = bool(row.get("fallback", False))
        return rows, flags

    del_marg, del_fb = read_marginal("deletion")
    ins_marg, ins_fb = read_marginal("insertion")
    sub_table, sub_fb = read_table("substitution")
    trans_table, trans_fb = read_table("transposition")

    position = np.empty((len(EDIT_TYPES), bins))
    pos_fb = np.zeros(len(EDIT_TYPES), dtype=bool)
    raw_pos = doc.get("position", {})
    for i, t in enumerate(EDIT_TYPES):
        section = raw_pos.get(t.value)
        if section is None:
            position[i] = _uniform(bins)
            pos_fb[i] = True
        else:
            p = [float(x) for x in section["p"]]
            if len(p) != bins:
                raise StatsError(f"position histogram for {t.value} has wrong size")
            position[i] = p
            pos_fb[i] = bool(section.get("fallback", False))

    return StatsModel(
        dataset_id=doc["dataset_id"],
        alphabet=alphabet,
        bins=bins,
        error_types=error_types,
        deletion_marginal=del_marg,
        insertion_marginal=ins_marg,
        substitution_table=sub_table,
        transposition_table=trans_table,
        position=position,
        deletion_fallback=del_fb,
        insertion_fallback=ins_fb,
        substitution_row_fallback=sub_fb,
        transposition_row_fallback=trans_fb,
        position_fallback=pos_fb,
        event_count=int(doc.get("event_count", 0)),
    )


def stats_digest(stats: StatsModel) -> str:
    return hashlib.sha256(save_stats(stats)).hexdigest()
