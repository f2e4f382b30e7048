"""Dictionary + edit-distance spellchecker baselines.

A frequency dictionary is scanned for candidates within Levenshtein
distance 1, then 2; the highest-frequency candidate wins, ties broken
lexicographically.  A catalog-enhanced dictionary additionally contains
full product names (spaces included) and their tokens.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, TextIO

from .corpus import Alphabet, DEFAULT_ALPHABET


class DictionaryError(Exception):
    """Raised for empty or malformed dictionaries."""


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance (insert / delete / substitute)."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(
                prev[j] + 1,
                cur[j - 1] + 1,
                prev[j - 1] + (ca != cb),
            ))
        prev = cur
    return prev[-1]


@dataclass
class FrequencyDictionary:
    words: dict[str, int]
    source: str = "default-english"

    def __post_init__(self):
        if any(f < 1 for f in self.words.values()):
            raise DictionaryError("frequencies must be >= 1")

    def __contains__(self, word: str) -> bool:
        return word in self.words

    def __len__(self) -> int:
        return len(self.words)


def load_dictionary(
    stream: TextIO,
    source: str = "default-english",
    alphabet: Alphabet = DEFAULT_ALPHABET,
) -> FrequencyDictionary:
    """Read ``word<TAB>frequency`` lines (frequency defaults to 1)."""
    words: dict[str, int] = {}
    for line in stream:
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        word = alphabet.canonicalize(fields[0])
        if not word:
            continue
        freq = int(fields[1]) if len(fields) > 1 and fields[1].strip() else 1
        words[word] = max(words.get(word, 0), freq)
    if not words:
        raise DictionaryError("dictionary stream contains no words")
    return FrequencyDictionary(words=words, source=source)


def save_dictionary(dictionary: FrequencyDictionary, stream: TextIO) -> None:
    for word in sorted(dictionary.words):
        stream.write(f"{word}\t{dictionary.words[word]}\n")


def enhance_with_catalog(
    base: FrequencyDictionary,
    catalog: Sequence[str],
    frequency: int = 100,
    alphabet: Alphabet = DEFAULT_ALPHABET,
) -> FrequencyDictionary:
    """Add full product names (single entries, spaces kept) and their tokens."""
    words = dict(base.words)
    for name in catalog:
        canonical = alphabet.canonicalize(name)
        if not canonical:
            continue
        words[canonical] = max(words.get(canonical, 0), frequency)
        for token in canonical.split():
            words[token] = max(words.get(token, 0), frequency)
    return FrequencyDictionary(words=words, source="catalog-enhanced")


def baseline_correct(
    word: str,
    dictionary: FrequencyDictionary,
    max_edit: int = 2,
) -> Optional[str]:
    """Closest dictionary word within ``max_edit``, or None.

    Distance tiers are strict: any distance-1 candidate beats every
    distance-2 candidate regardless of frequency; within a tier the
    highest frequency wins, then lexicographic order.
    """
    if not dictionary.words:
        raise DictionaryError("cannot correct against an empty dictionary")
    if word in dictionary:
        return word
    for tier in range(1, max_edit + 1):
        best: Optional[str] = None
        best_freq = -1
        for cand, freq in dictionary.words.items():
            if abs(len(cand) - len(word)) > tier:
                continue
            if levenshtein(word, cand) <= tier:
                if freq > best_freq or (freq == best_freq and (best is None or cand < best)):
                    best, best_freq = cand, freq
        if best is not None:
            return best
    return None


def correct_query(
    query: str,
    dictionary: FrequencyDictionary,
    max_edit: int = 2,
    alphabet: Alphabet = DEFAULT_ALPHABET,
) -> str:
    """Whole-string correction first (reaching full catalog names), then
    token-wise correction with unknown tokens kept as typed."""
    canonical = alphabet.canonicalize(query)
    if not canonical:
        return canonical
    whole = baseline_correct(canonical, dictionary, max_edit)
    if whole is not None:
        return whole
    tokens = [
        baseline_correct(tok, dictionary, max_edit) or tok
        for tok in canonical.split()
    ]
    return " ".join(tokens)


def levenshtein_within(a: str, b: str, limit: int) -> int:
    """Edit distance if it is <= limit, else limit + 1 (banded DP)."""
    if abs(len(a) - len(b)) > limit:
        return limit + 1
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    big = limit + 1
    prev = [j if j <= limit else big for j in range(len(b) + 1)]
    for i, ca in enumerate(a, 1):
        lo = max(1, i - limit)
        hi = min(len(b), i + limit)
        cur = [big] * (len(b) + 1)
        if lo == 1:
            cur[0] = i if i <= limit else big
        for j in range(lo, hi + 1):
            cur[j] = min(
                prev[j] + 1,
                cur[j - 1] + 1,
                prev[j - 1] + (ca != b[j - 1]),
            )
        if min(cur[lo:hi + 1]) > limit:
            return big
        prev = cur
    return prev[-1] if prev[-1] <= limit else big


class CachedCorrector:
    """Bulk-evaluation wrapper: length-bucketed candidate scan + memoization.

    Produces exactly the same corrections as :func:`baseline_correct`.
    """

    def __init__(self, dictionary: FrequencyDictionary, max_edit: int = 2):
        if not dictionary.words:
            raise DictionaryError("cannot correct against an empty dictionary")
        self.dictionary = dictionary
        self.max_edit = max_edit
        self._by_length: dict[int, list[tuple[str, int]]] = {}
        for word, freq in dictionary.words.items():
            self._by_length.setdefault(len(word), []).append((word, freq))
        self._cache: dict[str, Optional[str]] = {}

    def correct_word(self, word: str) -> Optional[str]:
        if word in self._cache:
            return self._cache[word]
        result: Optional[str] = None
        if word in self.dictionary:
            result = word
        else:
            for tier in range(1, self.max_edit + 1):
                best: Optional[str] = None
                best_freq = -1
                for length in range(len(word) - tier, len(word) + tier + 1):
                    for cand, freq in self._by_length.get(length, ()):
                        if freq < best_freq or (freq == best_freq and best is not None and cand >= best):
                            continue
                        if levenshtein_within(word, cand, tier) <= tier:
                            best, best_freq = cand, freq
                if best is not None:
                    result = best
                    break
        self._cache[word] = result
        return result

    def correct(self, query: str, alphabet: Alphabet = DEFAULT_ALPHABET) -> str:
        canonical = alphabet.canonicalize(query)
        if not canonical:
            return canonical
        whole = self.correct_word(canonical)
        if whole is not None:
            return whole
        return " ".join(
            self.correct_word(tok) or tok for tok in canonical.split()
        )
