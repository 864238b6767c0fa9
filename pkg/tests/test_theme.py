from __future__ import annotations

import math

import pytest

from helpers import make_story

from themeweave.corpus import LexClass, read_conllu
from themeweave.filters import FilterLists
from themeweave.theme import (
    DegenerateThemeError,
    build_profile,
    extract_compounds,
    load_profile,
    profile_from_json,
    profile_to_json,
    salience_ne,
    salience_tables,
    salience_tfidf,
    save_profile,
    term_stats,
)


def noun_story(words, story_id="t"):
    rows = [[(w, w.lower(), "NOUN", 0 if i == 0 else 1, "root" if i == 0 else "conj")
             for i, w in enumerate(words)]]
    return make_story(rows, story_id=story_id)


def repeat_story(word, times, cls="NOUN"):
    rows = [[(word, word.lower(), cls, 0 if i == 0 else 1, "root" if i == 0 else "conj")
             for i in range(times)]]
    return make_story(rows)


def background_with(lemma_lists):
    return [noun_story(words, story_id=f"bg{i}") for i, words in enumerate(lemma_lists)]


# --- term statistics ---------------------------------------------------------


def test_term_stats_counts_tf_df_and_docs():
    theme = [repeat_story("engine", 5)]
    background = background_with(
        [["engine"], ["engine"]] + [["filler"]] * 8
    )
    stats = term_stats(theme, background)
    assert stats.tf[(LexClass.NOUN, "engine")] == 5
    assert stats.df["engine"] == 2
    assert stats.n_docs == 10


def test_term_stats_absent_lemma_has_no_tf_entry():
    stats = term_stats([noun_story(["engine"])], background_with([["other"]]))
    assert (LexClass.NOUN, "other") not in stats.tf


def test_term_stats_keys_are_per_class():
    story = make_story(
        [
            [
                ("run", "run", "NOUN", 0, "root"),
                ("run", "run", "VERB", 1, "conj"),
            ]
        ]
    )
    stats = term_stats([story], background_with([["x"]]))
    assert stats.tf[(LexClass.NOUN, "run")] == 1
    assert stats.tf[(LexClass.VERB, "run")] == 1


def test_term_stats_empty_theme_is_an_error():
    with pytest.raises(DegenerateThemeError):
        term_stats([], background_with([["x"]]))


# --- tf-idf salience ---------------------------------------------------------


def test_salience_tfidf_matches_hand_arithmetic():
    raw = 5 * math.log((10 + 1) / (2 + 1))
    assert raw == pytest.approx(6.4964, abs=5e-4)
    assert salience_tfidf(5, 2, 10, max_raw=2 * raw) == pytest.approx(0.5, abs=1e-12)


def test_salience_tfidf_class_maximum_scores_one():
    raw = 3 * math.log(11 / 1)
    assert salience_tfidf(3, 0, 10, max_raw=raw) == pytest.approx(1.0)


def test_salience_tfidf_idf_is_monotonic():
    everywhere = salience_tfidf(1, 10, 10, max_raw=1.0)
    nowhere = salience_tfidf(1, 0, 10, max_raw=1.0)
    assert everywhere < nowhere


def test_salience_tfidf_zero_max_raw_is_degenerate():
    with pytest.raises(DegenerateThemeError):
        salience_tfidf(5, 2, 10, max_raw=0.0)


def test_salience_tables_normalize_per_class():
    theme = [noun_story(["engine", "engine", "gear"])]
    background = background_with([["engine"], ["x"]])
    tables = salience_tables(term_stats(theme, background))
    nouns = tables[LexClass.NOUN]
    assert max(nouns.values()) == pytest.approx(1.0)
    assert set(nouns) == {"engine", "gear"}


# --- named-entity salience ---------------------------------------------------


def test_salience_ne_values():
    assert salience_ne(1) == pytest.approx(0.0)
    assert salience_ne(4) == pytest.approx(0.75)
    assert salience_ne(100) == pytest.approx(0.99)


def test_salience_ne_rejects_zero():
    with pytest.raises(ValueError):
        salience_ne(0)


def test_salience_ne_is_increasing_and_bounded():
    values = [salience_ne(c) for c in range(1, 200)]
    assert all(b > a for a, b in zip(values, values[1:]))
    assert all(0.0 <= v < 1.0 for v in values)


# --- compounds and entity spans ----------------------------------------------


def hero_story(times):
    rows = []
    for _ in range(times):
        rows.append(
            [
                ("Luke", "Luke", "PROPN", 3, "nsubj", "PERSON"),
                ("Skywalker", "Skywalker", "PROPN", 1, "flat", "PERSON"),
                ("flies", "fly", "VERB", 0, "root"),
            ]
        )
    return make_story(rows, story_id="hero")


def test_ne_span_salience_follows_count():
    compounds = extract_compounds([hero_story(12)], max_len=3)
    spans = {c.tokens: c for c in compounds}
    assert ("Luke", "Skywalker") in spans
    assert spans[("Luke", "Skywalker")].salience == pytest.approx(1 - 1 / 12)
    assert spans[("Luke", "Skywalker")].lexical_class is LexClass.PROPN


def test_max_len_one_blocks_compounds_but_not_ne_spans():
    story = make_story(
        [
            [
                ("speeder", "speeder", "NOUN", 0, "root"),
                ("bike", "bike", "NOUN", 1, "compound"),
            ]
        ] * 2
    )
    compounds = extract_compounds([story, hero_story(2)], max_len=1)
    assert all(c.lexical_class is LexClass.PROPN for c in compounds)
    assert ("Luke", "Skywalker") in {c.tokens for c in compounds}


def test_single_occurrence_sequences_are_excluded():
    story = make_story(
        [
            [
                ("speeder", "speeder", "NOUN", 0, "root"),
                ("bike", "bike", "NOUN", 1, "compound"),
            ]
        ]
    )
    compounds = extract_compounds([story], max_len=3)
    assert ("speeder", "bike") not in {c.tokens for c in compounds}


def test_repeated_compound_uses_head_lemma_salience():
    story = make_story(
        [
            [
                ("speeder", "speeder", "NOUN", 0, "root"),
                ("bike", "bike", "NOUN", 1, "compound"),
            ]
        ] * 3
    )
    compounds = extract_compounds([story], max_len=3, noun_salience={"bike": 0.8})
    spans = {c.tokens: c for c in compounds}
    assert spans[("speeder", "bike")].salience == pytest.approx(0.8)
    assert spans[("speeder", "bike")].head_lemma == "bike"


# --- profile construction ----------------------------------------------------


def simple_background():
    return background_with([["filler"], ["padding"]])


def test_offensive_words_never_become_candidates():
    theme = [noun_story(["blaster", "blaster", "slur"])]
    filters = FilterLists(offensive_words=frozenset({"slur"}))
    profile = build_profile(theme, simple_background(), filters, k_max=10)
    surfaces = [c.surface for c in profile.candidates[LexClass.NOUN]]
    assert "slur" not in surfaces
    assert "blaster" in surfaces


def test_k_max_caps_every_class():
    theme = [noun_story(["a1", "b2", "c3", "d4", "e5"])]
    profile = build_profile(theme, simple_background(), FilterLists(), k_max=3)
    for cands in profile.candidates.values():
        assert len(cands) <= 3


def test_equal_salience_ties_break_lexicographically():
    theme = [noun_story(["zeta", "beta"])]  # same tf, same df: equal salience
    profile = build_profile(theme, simple_background(), FilterLists(), k_max=10)
    nouns = [c.surface for c in profile.candidates[LexClass.NOUN]]
    assert nouns == ["beta", "zeta"]


def test_candidate_lists_sorted_by_salience_descending():
    theme = [noun_story(["common", "common", "common", "rare"])]
    background = background_with([["common"], ["common"], ["x"]])
    profile = build_profile(theme, background, FilterLists(), k_max=10)
    for cands in profile.candidates.values():
        saliences = [c.salience for c in cands]
        assert saliences == sorted(saliences, reverse=True)


def spaced_noun_story(words, story_id="t"):
    rows = []
    for i, word in enumerate(words):
        rows.append((word, word.lower(), "NOUN", 0 if i == 0 else 1, "root" if i == 0 else "conj"))
        rows.append(("and", "and", "CCONJ", 1, "cc"))
    return make_story([rows], story_id=story_id)


def test_tf_scaling_does_not_change_ranking():
    theme = [spaced_noun_story(["engine", "engine", "gear", "lever", "lever", "lever"])]
    background = background_with([["engine"], ["gear", "lever"]])
    base = build_profile(theme, background, FilterLists(), k_max=10)
    tripled = build_profile(theme * 3, background, FilterLists(), k_max=10)
    order = lambda p: [c.surface for c in p.candidates[LexClass.NOUN]]
    assert order(base) == order(tripled)


def test_numeric_tokens_are_not_candidates():
    theme = [
        make_story(
            [
                [
                    ("42", "42", "NOUN", 0, "root"),  # mistagged number
                    ("engine", "engine", "NOUN", 1, "conj"),
                ]
            ]
        )
    ]
    profile = build_profile(theme, simple_background(), FilterLists(), k_max=10)
    assert "42" not in [c.surface for c in profile.candidates[LexClass.NOUN]]


def test_stop_worded_theme_is_degenerate():
    theme = [noun_story(["mile", "mile"])]
    filters = FilterLists(math_words=frozenset({"mile"}))
    with pytest.raises(DegenerateThemeError):
        build_profile(theme, simple_background(), filters)


def test_candidate_surface_is_most_frequent_form():
    rows = [
        ("ships", "ship", "NOUN", 0, "root"),
        ("of", "of", "ADP", 1, "case"),
        ("ships", "ship", "NOUN", 1, "conj"),
        ("near", "near", "ADP", 1, "case"),
        ("ship", "ship", "NOUN", 1, "conj"),
    ]
    theme = [make_story([rows])]
    profile = build_profile(theme, simple_background(), FilterLists(), k_max=10)
    by_lemma = {c.head_lemma: c for c in profile.candidates[LexClass.NOUN]}
    assert by_lemma["ship"].surface == "ships"


# --- serialization ------------------------------------------------------------


def test_profile_json_round_trip(tmp_path):
    theme = [hero_story(3), noun_story(["blaster", "blaster", "sabre"])]
    profile = build_profile(theme, simple_background(), FilterLists(), k_max=5)
    path = tmp_path / "profile.json"
    save_profile(profile, path)
    loaded = load_profile(path)
    assert loaded == profile


def test_profile_json_is_deterministic():
    theme = [hero_story(2)]
    profile = build_profile(theme, simple_background(), FilterLists(), k_max=5)
    assert profile_to_json(profile) == profile_to_json(profile)


def test_profile_version_check():
    theme = [noun_story(["blaster", "blaster"])]
    profile = build_profile(theme, simple_background(), FilterLists())
    text = profile_to_json(profile).replace('"version": "1"', '"version": "99"')
    with pytest.raises(ValueError):
        profile_from_json(text)
