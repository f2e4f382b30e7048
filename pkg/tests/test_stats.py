import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spellsearch.corpus import DEFAULT_ALPHABET, EDIT_TYPES, EditEvent, EditType
from spellsearch.stats import (
    FusionSpec,
    StatsError,
    as_selector,
    build_stats,
    fuse,
    load_stats,
    lookup_key_dist,
    qwerty_neighbors,
    qwerty_stats,
    sample_position,
    save_stats,
    stats_digest,
    uniform_stats,
)


def make_event(edit_type, key, other=None, pos=0.5, weight=1, source="t"):
    if other is None and edit_type is not EditType.DELETION:
        other = key if edit_type is EditType.REPLICATION else "x"
    return EditEvent(
        edit_type=edit_type, key=key, other_key=other,
        position_index=0, position_rel=pos, source=source, weight=weight,
    )


def assert_normalized(model):
    assert abs(model.error_types.sum() - 1) < 1e-9
    assert abs(model.deletion_marginal.sum() - 1) < 1e-9
    assert abs(model.insertion_marginal.sum() - 1) < 1e-9
    for row in model.substitution_table:
        assert abs(row.sum() - 1) < 1e-9
    for row in model.transposition_table:
        assert abs(row.sum() - 1) < 1e-9
    for row in model.position:
        assert abs(row.sum() - 1) < 1e-9


# ---------------------------------------------------------------------------
# build_stats

def test_build_stats_deletion_marginal_hand_count():
    events = [make_event(EditType.DELETION, k) for k in "aaeo"]
    model = build_stats(events)
    a = DEFAULT_ALPHABET.index
    assert model.deletion_marginal[a["a"]] == 0.5
    assert model.deletion_marginal[a["e"]] == 0.25
    assert model.deletion_marginal[a["o"]] == 0.25
    assert_normalized(model)


def test_build_stats_weights_count():
    events = [
        make_event(EditType.DELETION, "a", weight=3),
        make_event(EditType.SUBSTITUTION, "b", other="c", weight=1),
    ]
    model = build_stats(events)
    assert model.error_types[0] == 0.75  # deletion
    assert model.event_count == 4


def test_build_stats_point_mass_on_single_type():
    events = [make_event(EditType.TRANSPOSITION, "a", other="b")] * 3
    model = build_stats(events)
    assert model.error_types[EDIT_TYPES.index(EditType.TRANSPOSITION)] == 1.0
    assert model.deletion_fallback and model.insertion_fallback


def test_build_stats_empty_raises():
    with pytest.raises(StatsError):
        build_stats([])


def test_build_stats_mixed_sources_raises():
    events = [
        make_event(EditType.DELETION, "a", source="x"),
        make_event(EditType.DELETION, "a", source="y"),
    ]
    with pytest.raises(StatsError):
        build_stats(events)


def test_build_stats_permutation_invariant():
    rng = np.random.default_rng(5)
    events = []
    for _ in range(60):
        t = EDIT_TYPES[rng.integers(5)]
        key = "abcde"[rng.integers(5)]
        other = key if t is EditType.REPLICATION else "vwxyz"[rng.integers(5)]
        events.append(
            make_event(
                t, key,
                other=None if t is EditType.DELETION else other,
                pos=float(rng.random()),
                weight=int(rng.integers(1, 4)),
            )
        )
    a = build_stats(events)
    order = rng.permutation(len(events))
    b = build_stats([events[i] for i in order])
    assert np.array_equal(a.error_types, b.error_types)
    assert np.array_equal(a.substitution_table, b.substitution_table)
    assert np.array_equal(a.position, b.position)


@given(
    st.lists(
        st.tuples(
            st.sampled_from(EDIT_TYPES),
            st.sampled_from("abcdefghij 0123"),
            st.sampled_from("abcdefghij 0123"),
            st.floats(min_value=0, max_value=1),
            st.integers(min_value=1, max_value=9),
        ),
        min_size=1,
        max_size=50,
    )
)
@settings(max_examples=100)
def test_build_stats_normalization_property(raw):
    events = []
    for t, key, other, pos, weight in raw:
        if t is EditType.DELETION:
            other = None
        elif t is EditType.REPLICATION:
            other = key
        events.append(
            EditEvent(
                edit_type=t, key=key, other_key=other,
                position_index=0, position_rel=pos, source="h", weight=weight,
            )
        )
    assert_normalized(build_stats(events))


# ---------------------------------------------------------------------------
# uniform / qwerty

def test_uniform_stats_values():
    model = uniform_stats()
    assert np.allclose(model.error_types, 0.2)
    assert np.allclose(model.substitution_table, 1 / 37)
    assert np.allclose(model.position, 1 / model.bins)
    assert_normalized(model)


def test_qwerty_neighbors_of_o():
    nbr = qwerty_neighbors()
    assert nbr["o"] == {"i", "p", "k", "l", "9", "0"}


def test_qwerty_neighbor_symmetry():
    nbr = qwerty_neighbors()
    for key, hood in nbr.items():
        for other in hood:
            assert key in nbr[other], (key, other)


def test_qwerty_stats_substitution_row():
    model = qwerty_stats()
    a = DEFAULT_ALPHABET.index
    row = model.substitution_table[a["o"]]
    expected = {"i", "p", "k", "l", "9", "0"}
    for ch in DEFAULT_ALPHABET.chars:
        if ch in expected:
            assert row[a[ch]] == pytest.approx(1 / 6)
        else:
            assert row[a[ch]] == 0.0
    # space has no physical neighbors: flagged uniform fallback
    assert model.substitution_row_fallback[a[" "]]
    assert np.allclose(model.substitution_table[a[" "]], 1 / 37)
    assert_normalized(model)


# ---------------------------------------------------------------------------
# lookup

def test_lookup_scalar_marginals():
    model = uniform_stats()
    result = lookup_key_dist(model, EditType.DELETION, "a")
    assert result.value == pytest.approx(1 / 37)
    assert not result.fallback


def test_lookup_replication_point_mass():
    model = uniform_stats()
    result = lookup_key_dist(model, EditType.REPLICATION, "q")
    assert result.value[DEFAULT_ALPHABET.index["q"]] == 1.0
    assert result.value.sum() == 1.0


def test_lookup_unseen_type_falls_back():
    events = [make_event(EditType.DELETION, "a")]
    model = build_stats(events)
    result = lookup_key_dist(model, EditType.TRANSPOSITION, "q")
    assert result.fallback
    assert np.allclose(result.value, 1 / 37)
    assert np.all(result.value >= 0)


def test_lookup_key_outside_alphabet():
    with pytest.raises(StatsError):
        lookup_key_dist(uniform_stats(), EditType.DELETION, "é")


# ---------------------------------------------------------------------------
# position sampling

def test_sample_position_length_one():
    rng = np.random.default_rng(0)
    model = uniform_stats()
    assert all(
        sample_position(model, EditType.DELETION, 1, rng) == 0 for _ in range(20)
    )


def test_sample_position_point_mass_last_bin():
    base = uniform_stats()
    position = np.zeros_like(base.position)
    position[:, -1] = 1.0
    from spellsearch.stats import StatsModel

    model = StatsModel(
        dataset_id="pm", alphabet=base.alphabet, bins=base.bins,
        error_types=base.error_types,
        deletion_marginal=base.deletion_marginal,
        insertion_marginal=base.insertion_marginal,
        substitution_table=base.substitution_table,
        transposition_table=base.transposition_table,
        position=position,
    )
    rng = np.random.default_rng(1)
    draws = [sample_position(model, EditType.DELETION, 10, rng) for _ in range(500)]
    assert min(draws) >= 8  # last bin is [0.9, 1.0] -> indices 8..9
    assert max(draws) == 9


def test_sample_position_in_range():
    rng = np.random.default_rng(2)
    model = uniform_stats()
    for length in (2, 3, 9):
        for _ in range(200):
            assert 0 <= sample_position(model, EditType.INSERTION, length, rng) < length


# ---------------------------------------------------------------------------
# fusion

def test_fusion_weights_must_sum_to_one():
    u = uniform_stats()
    with pytest.raises(StatsError):
        FusionSpec([(u, 0.5), (u, 0.6)])
    with pytest.raises(StatsError):
        FusionSpec([(u, -0.1), (u, 1.1)])


def test_fusion_degenerate_always_picks():
    u = uniform_stats(dataset_id="only")
    selector = fuse(FusionSpec([(u, 1.0)]))
    rng = np.random.default_rng(3)
    assert all(selector.pick(rng).dataset_id == "only" for _ in range(50))


def test_fusion_selection_frequencies():
    a = uniform_stats(dataset_id="a")
    b = uniform_stats(dataset_id="b")
    selector = fuse(FusionSpec([(a, 0.5), (b, 0.5)]))
    rng = np.random.default_rng(4)
    picks = sum(selector.pick(rng).dataset_id == "a" for _ in range(10_000))
    assert abs(picks - 5000) <= 150  # ~3 binomial sigmas


def test_as_selector_wraps_model():
    u = uniform_stats()
    selector = as_selector(u)
    assert as_selector(selector) is selector
    rng = np.random.default_rng(5)
    assert selector.pick(rng) is u


# ---------------------------------------------------------------------------
# serialization

def test_save_load_round_trip_bit_exact():
    raw, = [make_event(EditType.SUBSTITUTION, "a", other="e", pos=0.37)]
    events = [raw] * 3 + [make_event(EditType.DELETION, "q", pos=0.9)]
    model = build_stats(events)
    loaded = load_stats(save_stats(model))
    assert loaded.dataset_id == model.dataset_id
    assert np.array_equal(loaded.error_types, model.error_types)
    assert np.array_equal(loaded.substitution_table, model.substitution_table)
    assert np.array_equal(loaded.position, model.position)
    assert np.array_equal(loaded.deletion_marginal, model.deletion_marginal)
    assert loaded.event_count == model.event_count
    assert stats_digest(loaded) == stats_digest(model)
    assert_normalized(loaded)


def test_load_truncated_raises():
    blob = save_stats(uniform_stats())
    with pytest.raises(StatsError):
        load_stats(blob[: len(blob) // 2])


def test_load_version_mismatch():
    blob = save_stats(uniform_stats()).replace(b'"version": 1', b'"version": 9')
    with pytest.raises(StatsError):
        load_stats(blob)


def test_load_minimal_handwritten_file():
    doc = {
        "format": "spellsearch-stats",
        "version": 1,
        "dataset_id": "tiny",
        "alphabet": DEFAULT_ALPHABET.chars,
        "bins": 4,
        "event_count": 1,
        "error_types": {"deletion": 1.0},
        "key_stats": {
            "deletion": {"p": {c: (1.0 if c == "a" else 0.0) for c in DEFAULT_ALPHABET.chars}},
        },
        "position": {"deletion": {"p": [0.25, 0.25, 0.25, 0.25]}},
    }
    import json

    model = load_stats(json.dumps(doc).encode())
    assert model.error_types[0] == 1.0
    assert model.insertion_fallback
    assert model.substitution_row_fallback.all()
    assert model.position_fallback[1:].all()
    assert not model.position_fallback[0]
    assert_normalized(model)


# ---------------------------------------------------------------------------
# fixture-corpus statistics shape

def github_fixture_stats():
    from spellsearch.corpus import classify_pairs, parse_corpus
    from spellsearch.fixtures import fixture_corpus

    raw, fmt = fixture_corpus("github-fixture")
    pairs = parse_corpus(raw, fmt).pairs
    return build_stats(classify_pairs(pairs, source="github-fixture"))


def test_fixture_deletions_dominate():
    model = github_fixture_stats()
    assert int(np.argmax(model.error_types)) == EDIT_TYPES.index(EditType.DELETION)


def test_fixture_substitutions_have_nonlocal_mass():
    # unlike pure keyboard adjacency, observed substitution rows put weight
    # on keys far from the original
    model = github_fixture_stats()
    nbr = qwerty_neighbors()
    a = DEFAULT_ALPHABET.index
    row = model.substitution_table[a["a"]]
    local = sum(row[a[n]] for n in nbr["a"] if n in DEFAULT_ALPHABET)
    assert row.sum() - local > 0.05


def test_fixture_deletion_positions_skew_late():
    model = github_fixture_stats()
    deletion = model.position[EDIT_TYPES.index(EditType.DELETION)]
    edges = model.bin_edges
    centers = (edges[:-1] + edges[1:]) / 2
    mean_pos = float((deletion * centers).sum())
    assert mean_pos > 0.55
