"""Synthetic misspelling generation over a product catalog.

For each ground-truth string, N one-edit misspellings are drawn under a
statistics model (or per-draw dataset mixture): draw an edit type, draw a
position, apply the edit to the character there.  Degenerate draws that
would not produce a genuine, cleanly classifiable single typo (no-op swaps,
edits that break canonical form, insertions that duplicate a neighbor) are
rejected and redrawn, so every emitted sample classifies back to exactly
its recorded edit type.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, asdict
from typing import Iterable, Optional, Sequence, TextIO, Union

import numpy as np

from .corpus import Alphabet, DEFAULT_ALPHABET, EditType
from .stats import (
    FusionSelector,
    StatsModel,
    as_selector,
    lookup_key_dist,
    sample_edit_type,
    sample_position,
)


class GenerationError(Exception):
    """Raised when the retry budget is exhausted before N samples exist."""


class CatalogError(Exception):
    """Raised for catalogs with duplicate canonicalized entries."""


class TypoNotApplicable(Exception):
    """Internal signal: this (type, position) draw cannot yield a clean typo."""


@dataclass(frozen=True)
class SynthSample:
    text: str
    label: int
    edit_type: EditType
    source_dataset: str


@dataclass
class GenerationConfig:
    samples_per_class: int = 20
    keep_duplicate: bool = True
    rng_seed: int = 0
    max_retries: Optional[int] = None  # default 100 * samples_per_class
    strategy: str = "uniform"

    def __post_init__(self):
        if self.samples_per_class < 1:
            raise ValueError("samples_per_class must be >= 1")
        if self.max_retries is None:
            self.max_retries = 100 * self.samples_per_class
        if self.max_retries < self.samples_per_class:
            raise ValueError("max_retries must be >= samples_per_class")


def _is_canonical(s: str, alphabet: Alphabet) -> bool:
    return bool(s) and alphabet.canonicalize(s) == s


def _draw_key(
    row: np.ndarray,
    alphabet: Alphabet,
    rng: np.random.Generator,
    exclude: Sequence[str],
) -> str:
    """Sample a key from ``row`` with the excluded characters masked out."""
    masked = row.copy()
    for ch in exclude:
        if ch in alphabet:
            masked[alphabet.index[ch]] = 0.0
    total = masked.sum()
    if total <= 0.0:
        raise TypoNotApplicable("no admissible key mass after masking")
    masked /= total
    u = rng.random()
    cum = 0.0
    for i, p in enumerate(masked):
        cum += p
        if u < cum:
            return alphabet.chars[i]
    return alphabet.chars[len(masked) - 1]


def apply_typo(
    s: str,
    edit_type: EditType,
    index: int,
    stats_row: Optional[np.ndarray],
    rng: np.random.Generator,
    alphabet: Alphabet = DEFAULT_ALPHABET,
) -> str:
    """Apply one edit of the given type at ``index``.

    ``stats_row`` supplies the key distribution for insertions (the insertion
    marginal) and substitutions (the row for the key being replaced); other
    types need none.  Raises ``TypoNotApplicable`` when the draw is
    degenerate at this position (the caller redraws type and position).
    """
    if not 0 <= index < len(s):
        raise ValueError(f"index {index} out of range")

    if edit_type is EditType.DELETION:
        out = s[:index] + s[index + 1:]
        if not _is_canonical(out, alphabet):
            raise TypoNotApplicable("deletion breaks canonical form")
        return out

    if edit_type is EditType.INSERTION:
        if stats_row is None:
            raise ValueError("insertion needs the insertion key marginal")
        # Exclude both neighbors of the insertion point: a key equal to
        # either would read back as a replication, not an insertion.
        exclude = [s[index]]
        if index + 1 < len(s):
            exclude.append(s[index + 1])
        else:
            exclude.append(" ")  # no trailing space
        key = _draw_key(stats_row, alphabet, rng, exclude)
        return s[:index + 1] + key + s[index + 1:]

    if edit_type is EditType.REPLICATION:
        if s[index] == " ":
            raise TypoNotApplicable("cannot replicate a space")
        return s[:index + 1] + s[index] + s[index + 1:]

    if edit_type is EditType.SUBSTITUTION:
        if stats_row is None:
            raise ValueError("substitution needs the key's substitution row")
        exclude = [s[index]]
        if (
            index == 0
            or index == len(s) - 1
            or s[index - 1] == " "
            or s[index + 1] == " "
        ):
            exclude.append(" ")
        key = _draw_key(stats_row, alphabet, rng, exclude)
        return s[:index] + key + s[index + 1:]

    if edit_type is EditType.TRANSPOSITION:
        if len(s) < 2:
            raise TypoNotApplicable("transposition needs two characters")
        i = index if index < len(s) - 1 else index - 1
        if s[i] == s[i + 1]:
            raise TypoNotApplicable("swapping equal characters is a no-op")
        out = s[:i] + s[i + 1] + s[i] + s[i + 2:]
        if not _is_canonical(out, alphabet):
            raise TypoNotApplicable("transposition breaks canonical form")
        return out

    raise ValueError(f"unknown edit type {edit_type}")


def generate_samples(
    s_gt: str,
    config: GenerationConfig,
    stats: Union[StatsModel, FusionSelector],
    label: int = 0,
    rng: Optional[np.random.Generator] = None,
    alphabet: Alphabet = DEFAULT_ALPHABET,
) -> list[SynthSample]:
    """Generate exactly N misspellings of one ground-truth string.

    With ``keep_duplicate`` off, already-seen texts are discarded and the
    iteration retried; the total attempt budget is ``max_retries``.
    """
    if not _is_canonical(s_gt, alphabet):
        raise ValueError(f"ground truth {s_gt!r} is not canonicalized")
    selector = as_selector(stats)
    if rng is None:
        rng = class_rng(config.rng_seed, s_gt)

    samples: list[SynthSample] = []
    seen: set[str] = set()
    attempts = 0
    while len(samples) < config.samples_per_class:
        attempts += 1
        if attempts > config.max_retries:
            raise GenerationError(
                f"exhausted {config.max_retries} attempts generating "
                f"{config.samples_per_class} samples for {s_gt!r} "
                f"(keep_duplicate={config.keep_duplicate})"
            )
        model = selector.pick(rng)
        edit_type = sample_edit_type(model, rng)
        # A degenerate (type, position) draw redraws the position, keeping
        # the drawn type so emitted type frequencies track the model; only a
        # type that keeps failing (inapplicable anywhere, e.g. transposition
        # of a 1-character string) is redrawn from scratch.
        text = None
        for _ in range(10):
            index = sample_position(model, edit_type, len(s_gt), rng)
            if edit_type is EditType.INSERTION:
                row = model.insertion_marginal
            elif edit_type is EditType.SUBSTITUTION:
                row = lookup_key_dist(model, edit_type, s_gt[index]).value
            else:
                row = None
            try:
                text = apply_typo(s_gt, edit_type, index, row, rng, alphabet)
                break
            except TypoNotApplicable:
                continue
        if text is None:
            continue
        if not config.keep_duplicate and text in seen:
            continue
        seen.add(text)
        samples.append(
            SynthSample(
                text=text,
                label=label,
                edit_type=edit_type,
                source_dataset=model.dataset_id,
            )
        )
    return samples


def class_rng(master_seed: int, class_name: str) -> np.random.Generator:
    """Per-class generator derived from the master seed and class identity.

    Keyed by the class string, not its catalog position, so reordering the
    catalog leaves every class's samples unchanged.
    """
    digest = hashlib.sha256(
        f"{master_seed}\x1f{class_name}".encode("utf-8")
    ).digest()
    return np.random.Generator(
        np.random.PCG64(int.from_bytes(digest[:8], "little"))
    )


def validate_catalog(
    catalog: Sequence[str], alphabet: Alphabet = DEFAULT_ALPHABET
) -> list[str]:
    """Canonicalize catalog entries, rejecting collisions and empties."""
    canonical: list[str] = []
    first_seen: dict[str, str] = {}
    collisions: list[tuple[str, str]] = []
    for name in catalog:
        c = alphabet.canonicalize(name)
        if not c:
            raise CatalogError(f"catalog entry {name!r} canonicalizes to empty")
        if c in first_seen:
            collisions.append((first_seen[c], name))
        else:
            first_seen[c] = name
        canonical.append(c)
    if collisions:
        listed = "; ".join(f"{a!r} vs {b!r}" for a, b in collisions)
        raise CatalogError(f"duplicate canonicalized catalog entries: {listed}")
    return canonical


def build_training_set(
    catalog: Sequence[str],
    config: GenerationConfig,
    stats: Union[StatsModel, FusionSelector],
    alphabet: Alphabet = DEFAULT_ALPHABET,
) -> list[SynthSample]:
    """Generate N samples per catalog entry (N * |V| total with duplicates kept)."""
    canonical = validate_catalog(catalog, alphabet)
    samples: list[SynthSample] = []
    for label, name in enumerate(canonical):
        samples.extend(
            generate_samples(
                name, config, stats,
                label=label,
                rng=class_rng(config.rng_seed, name),
                alphabet=alphabet,
            )
        )
    return samples


# ---------------------------------------------------------------------------
# Dataset files

DATASET_FORMAT = "spellsearch-dataset"
DATASET_VERSION = 1


def save_dataset(
    samples: Iterable[SynthSample],
    config: GenerationConfig,
    stats_digest: str,
    stream: TextIO,
) -> None:
    """Write samples as TSV with a provenance comment header."""
    header = {
        "format": DATASET_FORMAT,
        "version": DATASET_VERSION,
        "config": asdict(config),
        "stats_digest": stats_digest,
    }
    stream.write(f"# {json.dumps(header, sort_keys=True)}\n")
    for s in samples:
        stream.write(
            f"{s.text}\t{s.label}\t{s.edit_type.value}\t{s.source_dataset}\n"
        )


def load_dataset(stream: TextIO) -> tuple[list[SynthSample], dict]:
    """Read a dataset TSV; returns (samples, header metadata)."""
    header: dict = {}
    samples: list[SynthSample] = []
    for lineno, line in enumerate(stream, 1):
        line = line.rstrip("\n")
        if not line:
            continue
        if line.startswith("#"):
            if not header:
                try:
                    header = json.loads(line[1:].strip())
                except json.JSONDecodeError:
                    header = {}
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise GenerationError(f"malformed dataset line {lineno}: {line!r}")
        samples.append(
            SynthSample(
                text=fields[0],
                label=int(fields[1]),
                edit_type=EditType(fields[2]),
                source_dataset=fields[3],
            )
        )
    return samples, header
