"""Theme profiles: salience statistics and ranked rewrite candidates.

A theme is just a corpus. Salience of common content words is normalized
tf-idf against a background collection; named entities, which are rare in
small theme corpora, are scored 1 - 1/count instead. The profile also
collects multi-word noun compounds and named-entity spans so they can be
proposed as single rewrite units.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

from .corpus import LexClass, Story, mark_content, ne_key, rewrite_units
from .filters import FilterLists

PROFILE_VERSION = "1"
DEFAULT_TOP_K = 50
DEFAULT_COMPOUND_LEN = 3

# classes whose salience comes from tf-idf tables (named entities are separate)
TFIDF_CLASSES = (LexClass.NOUN, LexClass.VERB, LexClass.ADJ)

_NUMERIC_RE = re.compile(r"[0-9][0-9.,:/%-]*")


class DegenerateThemeError(ValueError):
    """The theme corpus carries no usable salience signal."""


@dataclass(frozen=True)
class RewriteCandidate:
    tokens: tuple[str, ...]
    head_lemma: str
    lexical_class: LexClass
    salience: float

    @property
    def surface(self) -> str:
        return " ".join(self.tokens)

    @property
    def head_word(self) -> str:
        return self.tokens[-1]


@dataclass(frozen=True)
class ThemeProfile:
    name: str
    version: str
    k_max: int
    compound_len: int
    salience: Mapping[LexClass, Mapping[str, float]]
    ne_inventory: tuple[tuple[tuple[str, ...], int], ...]
    compounds: tuple[RewriteCandidate, ...]
    candidates: Mapping[LexClass, tuple[RewriteCandidate, ...]]


@dataclass(frozen=True)
class TermStats:
    tf: Mapping[tuple[LexClass, str], int]
    df: Mapping[str, int]
    n_docs: int
    surface_counts: Mapping[tuple[LexClass, str], Mapping[str, int]]


def term_stats(theme_corpus: Sequence[Story], background: Sequence[Story]) -> TermStats:
    """Count theme term frequencies and background document frequencies.

    tf is keyed by (lexical class, lemma) over content tokens of the theme;
    df counts background documents containing the lemma in any class.
    """
    if not theme_corpus:
        raise DegenerateThemeError("empty theme corpus")
    if not background:
        raise DegenerateThemeError("empty background corpus")
    tf: Counter = Counter()
    surface_counts: dict[tuple[LexClass, str], Counter] = {}
    for story in theme_corpus:
        for position in story.content_positions:
            token = story.token_at(position)
            if token.pos not in TFIDF_CLASSES:
                continue
            key = (token.pos, token.lemma.lower())
            tf[key] += 1
            surface_counts.setdefault(key, Counter())[token.surface] += 1
    df: Counter = Counter()
    for story in background:
        lemmas = {
            token.lemma.lower()
            for sentence in story.sentences
            for token in sentence.tokens
        }
        df.update(lemmas)
    return TermStats(tf=dict(tf), df=dict(df), n_docs=len(background), surface_counts=surface_counts)


def salience_tfidf(tf: int, df: int, n_docs: int, max_raw: float) -> float:
    """Normalized tf-idf: tf * log((N+1)/(df+1)) scaled by the class maximum."""
    if max_raw == 0:
        raise DegenerateThemeError("maximum raw tf-idf is zero")
    raw = tf * math.log((n_docs + 1) / (df + 1))
    return raw / max_raw


def salience_ne(count: int) -> float:
    """Named-entity salience 1 - 1/count; grows with frequency, bounded below 1."""
    if count < 1:
        raise ValueError("named entity must occur at least once in the theme")
    return 1.0 - 1.0 / count


def _raw_tfidf_tables(stats: TermStats) -> dict[LexClass, dict[str, float]]:
    tables: dict[LexClass, dict[str, float]] = {cls: {} for cls in TFIDF_CLASSES}
    for (cls, lemma), count in stats.tf.items():
        tables[cls][lemma] = count * math.log((stats.n_docs + 1) / (stats.df.get(lemma, 0) + 1))
    return tables


def salience_tables(stats: TermStats) -> dict[LexClass, dict[str, float]]:
    """Per-class lemma -> salience in [0, 1]; the class maximum maps to 1."""
    raw = _raw_tfidf_tables(stats)
    tables: dict[LexClass, dict[str, float]] = {}
    for cls, entries in raw.items():
        if not entries:
            tables[cls] = {}
            continue
        max_raw = max(entries.values())
        if max_raw == 0:
            raise DegenerateThemeError(f"all {cls.value} tf-idf scores are zero")
        tables[cls] = {lemma: value / max_raw for lemma, value in entries.items()}
    return tables


def _ne_span_counts(theme_corpus: Iterable[Story]) -> Counter:
    counts: Counter = Counter()
    for story in theme_corpus:
        for unit in rewrite_units(story):
            if unit.lexical_class is LexClass.PROPN:
                counts[tuple(token.surface for token in unit.tokens)] += 1
    return counts


def _ne_candidates(theme_corpus: Iterable[Story], span_lemmas: dict) -> list[RewriteCandidate]:
    counts = _ne_span_counts(theme_corpus)
    out = []
    for span, count in counts.items():
        out.append(
            RewriteCandidate(
                tokens=span,
                head_lemma=span_lemmas.get(span, span[-1].lower()),
                lexical_class=LexClass.PROPN,
                salience=salience_ne(count),
            )
        )
    return out


def _span_head_lemmas(theme_corpus: Iterable[Story]) -> dict:
    lemmas: dict = {}
    for story in theme_corpus:
        for unit in rewrite_units(story):
            if unit.lexical_class is LexClass.PROPN:
                span = tuple(token.surface for token in unit.tokens)
                lemmas.setdefault(span, unit.head_token.lemma.lower())
    return lemmas


def _noun_compounds(
    theme_corpus: Iterable[Story],
    max_len: int,
    noun_salience: Mapping[str, float],
) -> list[RewriteCandidate]:
    """Contiguous noun/proper-noun subsequences of length 2..max_len seen twice."""
    counts: Counter = Counter()
    head_lemmas: dict = {}
    for story in theme_corpus:
        for sentence in story.sentences:
            run: list = []
            for token in list(sentence.tokens) + [None]:
                nounish = (
                    token is not None
                    and token.is_content
                    and token.pos in (LexClass.NOUN, LexClass.PROPN)
                )
                if nounish:
                    run.append(token)
                    continue
                for start in range(len(run)):
                    for length in range(2, min(max_len, len(run) - start) + 1):
                        window = run[start : start + length]
                        if _span_ne_key(window) is not None:
                            continue  # whole-span named entities are handled separately
                        span = tuple(t.surface for t in window)
                        counts[span] += 1
                        head_lemmas.setdefault(span, window[-1].lemma.lower())
                run = []
    out = []
    for span, count in counts.items():
        if count < 2:
            continue
        head = head_lemmas[span]
        out.append(
            RewriteCandidate(
                tokens=span,
                head_lemma=head,
                lexical_class=LexClass.NOUN,
                salience=noun_salience.get(head, 0.0),
            )
        )
    return out


def _span_ne_key(window) -> str | None:
    keys = {ne_key(token) for token in window}
    if len(keys) == 1:
        return next(iter(keys))
    return None


def extract_compounds(
    theme_corpus: Sequence[Story],
    max_len: int,
    noun_salience: Mapping[str, float] | None = None,
) -> list[RewriteCandidate]:
    """Multi-token rewrite candidates: noun compounds plus named-entity spans.

    Noun compounds must recur (count >= 2) and respect the length bound;
    named-entity spans are exempt from both and are always emitted whole.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    salience = noun_salience if noun_salience is not None else {}
    span_lemmas = _span_head_lemmas(theme_corpus)
    return _noun_compounds(theme_corpus, max_len, salience) + _ne_candidates(
        theme_corpus, span_lemmas
    )


def _is_numeric(surface: str) -> bool:
    return _NUMERIC_RE.fullmatch(surface) is not None


def _admissible(candidate: RewriteCandidate, filters: FilterLists) -> bool:
    for token in candidate.tokens:
        if filters.blocks_candidate(token) or _is_numeric(token):
            return False
    return True


def _ranked(candidates: Iterable[RewriteCandidate], k_max: int) -> tuple[RewriteCandidate, ...]:
    return tuple(sorted(candidates, key=lambda c: (-c.salience, c.surface))[:k_max])


def _best_surface(counter: Mapping[str, int]) -> str:
    return min(counter, key=lambda surface: (-counter[surface], surface))


def build_profile(
    theme_corpus: Sequence[Story],
    background: Sequence[Story],
    filters: FilterLists,
    k_max: int = DEFAULT_TOP_K,
    compound_len: int = DEFAULT_COMPOUND_LEN,
    name: str = "theme",
) -> ThemeProfile:
    """Build the full theme profile deterministically.

    Candidate ranking is by salience, ties broken by surface; filter-list
    members and purely numeric tokens never become candidates.
    """
    theme_corpus = [mark_content(story, filters) for story in theme_corpus]
    stats = term_stats(theme_corpus, background)
    tables = salience_tables(stats)
    if all(not table for table in tables.values()):
        raise DegenerateThemeError("theme corpus has no content words")

    singles: dict[LexClass, list[RewriteCandidate]] = {}
    for cls in TFIDF_CLASSES:
        entries = []
        for lemma, score in tables[cls].items():
            surface = _best_surface(stats.surface_counts[(cls, lemma)])
            entries.append(
                RewriteCandidate(
                    tokens=(surface,),
                    head_lemma=lemma,
                    lexical_class=cls,
                    salience=score,
                )
            )
        singles[cls] = entries

    ne_counts = _ne_span_counts(theme_corpus)
    ne_inventory = tuple(
        sorted(ne_counts.items(), key=lambda item: (-item[1], " ".join(item[0])))
    )
    span_lemmas = _span_head_lemmas(theme_corpus)
    ne_cands = _ne_candidates(theme_corpus, span_lemmas)
    compounds = _noun_compounds(theme_corpus, compound_len, tables[LexClass.NOUN])

    def admitted(cands: Iterable[RewriteCandidate]) -> list[RewriteCandidate]:
        return [c for c in cands if _admissible(c, filters)]

    candidates = {
        LexClass.NOUN: _ranked(admitted(singles[LexClass.NOUN] + compounds), k_max),
        LexClass.VERB: _ranked(admitted(singles[LexClass.VERB]), k_max),
        LexClass.ADJ: _ranked(admitted(singles[LexClass.ADJ]), k_max),
        LexClass.PROPN: _ranked(admitted(ne_cands), k_max),
    }
    return ThemeProfile(
        name=name,
        version=PROFILE_VERSION,
        k_max=k_max,
        compound_len=compound_len,
        salience={cls: dict(sorted(tables[cls].items())) for cls in TFIDF_CLASSES},
        ne_inventory=ne_inventory,
        compounds=tuple(sorted(compounds, key=lambda c: (-c.salience, c.surface))),
        candidates=candidates,
    )


def _candidate_to_json(candidate: RewriteCandidate) -> dict:
    return {
        "tokens": list(candidate.tokens),
        "head_lemma": candidate.head_lemma,
        "class": candidate.lexical_class.value,
        "salience": candidate.salience,
    }


def _candidate_from_json(payload: dict) -> RewriteCandidate:
    return RewriteCandidate(
        tokens=tuple(payload["tokens"]),
        head_lemma=payload["head_lemma"],
        lexical_class=LexClass(payload["class"]),
        salience=float(payload["salience"]),
    )


def profile_to_json(profile: ThemeProfile) -> str:
    """Serialize with stable key order so identical inputs give identical bytes."""
    payload = {
        "name": profile.name,
        "version": profile.version,
        "params": {"k_max": profile.k_max, "K": profile.compound_len},
        "salience": {
            cls.value: profile.salience.get(cls, {}) for cls in TFIDF_CLASSES
        },
        "ne_inventory": [
            {"tokens": list(span), "count": count} for span, count in profile.ne_inventory
        ],
        "compounds": [_candidate_to_json(c) for c in profile.compounds],
        "candidates": {
            cls.value: [_candidate_to_json(c) for c in cands]
            for cls, cands in sorted(profile.candidates.items(), key=lambda kv: kv[0].value)
        },
    }
    return json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def profile_from_json(text: str) -> ThemeProfile:
    payload = json.loads(text)
    version = payload.get("version")
    if version != PROFILE_VERSION:
        raise ValueError(f"unsupported profile version {version!r}")
    return ThemeProfile(
        name=payload["name"],
        version=version,
        k_max=int(payload["params"]["k_max"]),
        compound_len=int(payload["params"]["K"]),
        salience={
            LexClass(cls): dict(table) for cls, table in payload["salience"].items()
        },
        ne_inventory=tuple(
            (tuple(entry["tokens"]), int(entry["count"])) for entry in payload["ne_inventory"]
        ),
        compounds=tuple(_candidate_from_json(c) for c in payload["compounds"]),
        candidates={
            LexClass(cls): tuple(_candidate_from_json(c) for c in cands)
            for cls, cands in payload["candidates"].items()
        },
    )


def save_profile(profile: ThemeProfile, path: str | Path) -> None:
    Path(path).write_text(profile_to_json(profile), encoding="utf-8")


def load_profile(path: str | Path) -> ThemeProfile:
    return profile_from_json(Path(path).read_text(encoding="utf-8"))
