"""Typo corpora: parsing, canonicalization, and single-edit classification.

A corpus is a collection of (wrong, correct) string pairs.  Each pair is
canonicalized to a 37-character alphabet and classified into one of five
one-character edit classes (deletion, insertion, replication, substitution,
transposition) by aligning the two strings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import BinaryIO, Iterable, Optional

LETTERS = "abcdefghijklmnopqrstuvwxyz"
DIGITS = "0123456789"
SPACE = " "


class CorpusError(Exception):
    """Raised for unreadable or empty corpus streams."""


class EditType(Enum):
    DELETION = "deletion"
    INSERTION = "insertion"
    REPLICATION = "replication"
    SUBSTITUTION = "substitution"
    TRANSPOSITION = "transposition"


EDIT_TYPES = tuple(EditType)


class Alphabet:
    """Canonical character set: 26 letters + 10 digits + space (37 total).

    Canonicalization case-folds, maps any character outside the set to a
    space, collapses runs of spaces and strips the ends.  It is idempotent.
    """

    def __init__(self, chars: str = LETTERS + DIGITS + SPACE):
        if len(set(chars)) != len(chars):
            raise ValueError("alphabet characters must be unique")
        self.chars = chars
        self.index = {c: i for i, c in enumerate(chars)}

    def __len__(self) -> int:
        return len(self.chars)

    def __contains__(self, ch: str) -> bool:
        return ch in self.index

    def canonicalize(self, text: str) -> str:
        folded = text.casefold()
        mapped = "".join(c if c in self.index else SPACE for c in folded)
        return " ".join(mapped.split())


DEFAULT_ALPHABET = Alphabet()


def canonicalize(text: str, alphabet: Alphabet = DEFAULT_ALPHABET) -> str:
    return alphabet.canonicalize(text)


@dataclass(frozen=True)
class TypoPair:
    """An observed (misspelled, ground-truth) pair from a corpus."""

    wrong: str
    correct: str
    weight: int = 1

    def __post_init__(self):
        if not self.wrong or not self.correct:
            raise ValueError("typo pair strings must be non-empty")
        if self.weight < 1:
            raise ValueError("weight must be >= 1")


@dataclass(frozen=True)
class EditEvent:
    """A classified one-character edit.

    ``key`` is the ground-truth character acted on; ``other_key`` is the
    inserted/substituting/swapped character (absent for deletions).
    Deletion positions index into the ground-truth string, all other types
    index into the mistyped string; ``position_rel`` is normalized by the
    respective reference length.
    """

    edit_type: EditType
    key: str
    other_key: Optional[str]
    position_index: int
    position_rel: float
    source: str = ""
    weight: int = 1

    def __post_init__(self):
        if not 0.0 <= self.position_rel <= 1.0:
            raise ValueError("position_rel must lie in [0, 1]")
        needs_other = self.edit_type is not EditType.DELETION
        if needs_other != (self.other_key is not None):
            raise ValueError("other_key present iff edit type is not deletion")
        if self.edit_type is EditType.REPLICATION and self.other_key != self.key:
            raise ValueError("replication duplicates the key itself")


@dataclass
class ParseResult:
    pairs: list[TypoPair]
    skipped: int = 0


def normalize_position(index: int, reference_length: int) -> float:
    """Map a zero-based index to [0, 1]: 0 is the first character, 1 the last."""
    if reference_length < 1:
        raise ValueError("reference_length must be >= 1")
    if not 0 <= index < reference_length:
        raise ValueError(f"index {index} out of range for length {reference_length}")
    if reference_length == 1:
        return 0.0
    return index / (reference_length - 1)


# ---------------------------------------------------------------------------
# Parsing

def _pair_from_fields(fields: list[str], alphabet: Alphabet) -> Optional[TypoPair]:
    if len(fields) < 2:
        return None
    wrong = alphabet.canonicalize(fields[0])
    correct = alphabet.canonicalize(fields[1])
    if not wrong or not correct:
        return None
    weight = 1
    if len(fields) >= 3 and fields[2].strip():
        try:
            weight = int(fields[2])
        except ValueError:
            return None
        if weight < 1:
            return None
    return TypoPair(wrong=wrong, correct=correct, weight=weight)


def _iter_tsv(text: str, alphabet: Alphabet) -> Iterable[Optional[TypoPair]]:
    for line in text.splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield _pair_from_fields(line.split("\t"), alphabet)


def _iter_github_jsonl(text: str, alphabet: Alphabet) -> Iterable[Optional[TypoPair]]:
    # One JSON record per line, each carrying an "edits" list of
    # {"src": {"text": ...}, "tgt": {"text": ...}} entries.  Only edits whose
    # texts differ in exactly one whitespace token become pairs.
    for line in text.splitlines():
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError:
            yield None
            continue
        for edit in record.get("edits", []):
            try:
                src = edit["src"]["text"]
                tgt = edit["tgt"]["text"]
            except (KeyError, TypeError):
                yield None
                continue
            if edit.get("is_typo") is False:
                continue
            src_tokens = alphabet.canonicalize(src).split()
            tgt_tokens = alphabet.canonicalize(tgt).split()
            if len(src_tokens) != len(tgt_tokens):
                yield None
                continue
            diffs = [
                (s, t) for s, t in zip(src_tokens, tgt_tokens) if s != t
            ]
            if len(diffs) != 1:
                yield None
                continue
            yield TypoPair(wrong=diffs[0][0], correct=diffs[0][1])


def _iter_twitter_tsv(text: str, alphabet: Alphabet) -> Iterable[Optional[TypoPair]]:
    # wrong<TAB>correct with optional trailing metadata columns.
    for line in text.splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield _pair_from_fields(line.split("\t")[:2], alphabet)


_FORMAT_READERS = {
    "tsv": _iter_tsv,
    "github-jsonl": _iter_github_jsonl,
    "twitter-tsv": _iter_twitter_tsv,
}


def parse_corpus(
    source: BinaryIO | bytes,
    format: str = "tsv",
    alphabet: Alphabet = DEFAULT_ALPHABET,
) -> ParseResult:
    """Parse a corpus stream into canonicalized typo pairs.

    Malformed records are skipped and counted.  Raises ``CorpusError`` if the
    stream cannot be decoded or yields zero parseable records.
    """
    if format not in _FORMAT_READERS:
        raise ValueError(f"unknown corpus format: {format!r}")
    raw = source if isinstance(source, bytes) else source.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorpusError(f"corpus stream is not valid UTF-8: {exc}") from exc

    pairs: list[TypoPair] = []
    skipped = 0
    for item in _FORMAT_READERS[format](text, alphabet):
        if item is None:
            skipped += 1
        else:
            pairs.append(item)
    if not pairs:
        raise CorpusError("corpus contains no parseable records")
    return ParseResult(pairs=pairs, skipped=skipped)


# ---------------------------------------------------------------------------
# Alignment

@dataclass(frozen=True)
class Opcode:
    """One diff span: ``tag`` in {equal, insert, delete, replace}.

    Spans transform ``correct[i1:i2]`` into ``wrong[j1:j2]``.
    """

    tag: str
    i1: int
    i2: int
    j1: int
    j2: int


def align(correct: str, wrong: str) -> list[Opcode]:
    """Minimal edit-distance alignment of ``correct`` onto ``wrong``.

    Unit costs for insert/delete/replace; the backtrace prefers diagonal
    moves on ties so adjacent swaps surface as a single replace span.
    """
    n, m = len(correct), len(wrong)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = i
    for j in range(1, m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        row, prev = dist[i], dist[i - 1]
        ci = correct[i - 1]
        for j in range(1, m + 1):
            cost = 0 if ci == wrong[j - 1] else 1
            row[j] = min(prev[j - 1] + cost, prev[j] + 1, row[j - 1] + 1)

    # Backtrace, preferring diagonal, then delete, then insert on ties.
    steps: list[str] = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            cost = 0 if correct[i - 1] == wrong[j - 1] else 1
            if dist[i][j] == dist[i - 1][j - 1] + cost:
                steps.append("equal" if cost == 0 else "replace")
                i, j = i - 1, j - 1
                continue
        if i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            steps.append("delete")
            i -= 1
            continue
        steps.append("insert")
        j -= 1
    steps.reverse()

    opcodes: list[Opcode] = []
    i = j = 0
    for tag in steps:
        di = 0 if tag == "insert" else 1
        dj = 0 if tag == "delete" else 1
        if opcodes and opcodes[-1].tag == tag:
            last = opcodes[-1]
            opcodes[-1] = Opcode(tag, last.i1, last.i2 + di, last.j1, last.j2 + dj)
        else:
            opcodes.append(Opcode(tag, i, i + di, j, j + dj))
        i += di
        j += dj
    return opcodes


def apply_opcodes(correct: str, opcodes: list[Opcode], wrong: str) -> str:
    """Replay alignment opcodes against ``correct``, taking inserted and
    replaced characters from ``wrong``."""
    out: list[str] = []
    for op in opcodes:
        if op.tag == "equal":
            out.append(correct[op.i1:op.i2])
        elif op.tag in ("insert", "replace"):
            out.append(wrong[op.j1:op.j2])
        # deletions contribute nothing
    return "".join(out)


# ---------------------------------------------------------------------------
# Classification

def _shift_run_left(s: str, idx: int) -> int:
    """Leftmost index in the run of identical characters containing s[idx]."""
    while idx > 0 and s[idx - 1] == s[idx]:
        idx -= 1
    return idx


def classify_single_edit(
    pair: TypoPair, source: str = ""
) -> Optional[EditEvent]:
    """Classify a pair as exactly one typo class, or None.

    Returns None for identical strings and for pairs more than one edit
    apart.  Within runs of identical characters, deletions/replications are
    attributed to the leftmost equivalent index.  An insertion whose
    character lands adjacent to an identical character is a replication.
    """
    correct, wrong = pair.correct, pair.wrong
    if correct == wrong:
        return None
    opcodes = align(correct, wrong)
    edits = [op for op in opcodes if op.tag != "equal"]
    if len(edits) != 1:
        return None
    op = edits[0]
    ni, nj = op.i2 - op.i1, op.j2 - op.j1

    if op.tag == "replace" and ni == 1 and nj == 1:
        j = op.j1
        return EditEvent(
            EditType.SUBSTITUTION,
            key=correct[op.i1],
            other_key=wrong[j],
            position_index=j,
            position_rel=normalize_position(j, len(wrong)),
            source=source,
            weight=pair.weight,
        )
    if (
        op.tag == "replace"
        and ni == 2
        and nj == 2
        and correct[op.i1] == wrong[op.j1 + 1]
        and correct[op.i1 + 1] == wrong[op.j1]
    ):
        j = op.j1
        return EditEvent(
            EditType.TRANSPOSITION,
            key=correct[op.i1],
            other_key=correct[op.i1 + 1],
            position_index=j,
            position_rel=normalize_position(j, len(wrong)),
            source=source,
            weight=pair.weight,
        )
    if op.tag == "delete" and ni == 1:
        i = _shift_run_left(correct, op.i1)
        return EditEvent(
            EditType.DELETION,
            key=correct[i],
            other_key=None,
            position_index=i,
            position_rel=normalize_position(i, len(correct)),
            source=source,
            weight=pair.weight,
        )
    if op.tag == "insert" and nj == 1:
        j = _shift_run_left(wrong, op.j1)
        ch = wrong[j]
        # After the left shift the predecessor differs, so a run of length
        # >= 2 means the inserted character duplicates a neighbor.
        if j + 1 < len(wrong) and wrong[j + 1] == ch:
            return EditEvent(
                EditType.REPLICATION,
                key=ch,
                other_key=ch,
                position_index=j,
                position_rel=normalize_position(j, len(wrong)),
                source=source,
                weight=pair.weight,
            )
        key = wrong[j - 1] if j > 0 else correct[0]
        return EditEvent(
            EditType.INSERTION,
            key=key,
            other_key=ch,
            position_index=j,
            position_rel=normalize_position(j, len(wrong)),
            source=source,
            weight=pair.weight,
        )
    return None


def replay_event(correct: str, event: EditEvent) -> str:
    """Re-apply a classified edit to its ground-truth string.

    Inverse of classification up to run ambiguity; used to check round-trips.
    """
    t, i = event.edit_type, event.position_index
    if t is EditType.DELETION:
        return correct[:i] + correct[i + 1:]
    if t is EditType.REPLICATION:
        return correct[:i + 1] + correct[i] + correct[i + 1:]
    if t is EditType.INSERTION:
        # position indexes the inserted character in the mistyped string
        return correct[:i] + event.other_key + correct[i:]
    if t is EditType.SUBSTITUTION:
        return correct[:i] + event.other_key + correct[i + 1:]
    if t is EditType.TRANSPOSITION:
        return correct[:i] + correct[i + 1] + correct[i] + correct[i + 2:]
    raise ValueError(f"unknown edit type {t}")


def classify_pairs(
    pairs: Iterable[TypoPair], source: str = ""
) -> list[EditEvent]:
    """Classify every pair, dropping identical and multi-edit pairs."""
    events = []
    for pair in pairs:
        event = classify_single_edit(pair, source=source)
        if event is not None:
            events.append(event)
    return events
