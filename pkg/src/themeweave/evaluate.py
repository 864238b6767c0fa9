"""Reference-based evaluation (meteor-lite) and weight-grid tuning.

meteor-lite keeps the classic parameters: Fmean = 10PR/(R+9P) and a
fragmentation penalty of 0.5 * (chunks/matches)^3, with staged exact,
stem, and synonym matching. The paraphrase stage of the full metric is
deliberately absent, and stemming is a fixed suffix-rule table so that
scores are reproducible bit for bit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from collections.abc import Callable, Mapping, Sequence

from .decoder import DecoderConfig, DecoderState, decode_prepared, prepare_story
from .resources import ResourceSet, Taxonomy
from .scoring import Weights
from .corpus import Story
from .theme import ThemeProfile

# ordered suffix rules: (suffix, replacement, minimum leading characters);
# first match wins, identity rules shield shorter suffixes below them
_STEM_RULES = (
    ("sses", "ss", 2),
    ("ies", "i", 2),
    ("ss", "ss", 0),
    ("ing", "", 3),
    ("edly", "", 3),
    ("ed", "", 2),
    ("ly", "", 3),
    ("ness", "", 3),
    ("es", "", 2),
    ("s", "", 2),
)


def stem(word: str) -> str:
    """Deterministic suffix-stripping stemmer over the fixed rule table."""
    lowered = word.lower()
    for suffix, replacement, minimum in _STEM_RULES:
        if lowered.endswith(suffix) and len(lowered) - len(suffix) >= minimum:
            return lowered[: len(lowered) - len(suffix)] + replacement
    return lowered


SynonymMap = Mapping[str, frozenset]


def synonym_map_from_taxonomy(tax: Taxonomy) -> dict[str, frozenset]:
    """Word -> concept set, unioned over lexical classes, for synonym matching."""
    merged: dict[str, set] = {}
    for (lemma, _cls), concepts in tax.lemma_index.items():
        merged.setdefault(lemma, set()).update(concepts)
    return {lemma: frozenset(concepts) for lemma, concepts in merged.items()}


@dataclass(frozen=True)
class MatchAlignment:
    pairs: tuple[tuple[int, int, str], ...]  # (hyp index, ref index, stage)
    chunks: int

    @property
    def matches(self) -> int:
        return len(self.pairs)


def _match_stage(
    hyp_tokens: Sequence[str],
    ref_tokens: Sequence[str],
    hyp_free: list[bool],
    ref_free: list[bool],
    same: Callable[[str, str], bool],
    stage: str,
) -> list[tuple[int, int, str]]:
    pairs = []
    for i, hyp_token in enumerate(hyp_tokens):
        if not hyp_free[i]:
            continue
        for j, ref_token in enumerate(ref_tokens):
            if ref_free[j] and same(hyp_token, ref_token):
                pairs.append((i, j, stage))
                hyp_free[i] = False
                ref_free[j] = False
                break
    return pairs


def align(
    hyp_tokens: Sequence[str],
    ref_tokens: Sequence[str],
    stemmer: Callable[[str], str] = stem,
    synonym_map: SynonymMap | None = None,
) -> MatchAlignment:
    """Greedy one-to-one staged alignment: exact, then stem, then synonym."""
    hyp_free = [True] * len(hyp_tokens)
    ref_free = [True] * len(ref_tokens)
    pairs = _match_stage(
        hyp_tokens, ref_tokens, hyp_free, ref_free,
        lambda a, b: a.lower() == b.lower(), "exact",
    )
    pairs += _match_stage(
        hyp_tokens, ref_tokens, hyp_free, ref_free,
        lambda a, b: stemmer(a) == stemmer(b), "stem",
    )
    if synonym_map:
        def synonymous(a: str, b: str) -> bool:
            sa = synonym_map.get(a.lower())
            sb = synonym_map.get(b.lower())
            return bool(sa and sb and sa & sb)

        pairs += _match_stage(
            hyp_tokens, ref_tokens, hyp_free, ref_free, synonymous, "synonym"
        )
    pairs.sort()
    chunks = 0
    previous = None
    for hyp_index, ref_index, _stage in pairs:
        if previous is None or hyp_index != previous[0] + 1 or ref_index != previous[1] + 1:
            chunks += 1
        previous = (hyp_index, ref_index)
    return MatchAlignment(pairs=tuple(pairs), chunks=chunks)


def meteor_lite(
    hyp_tokens: Sequence[str],
    references: Sequence[Sequence[str]],
    stemmer: Callable[[str], str] = stem,
    synonym_map: SynonymMap | None = None,
) -> float:
    """Best score over the references; in [0, 1]."""
    if not references:
        raise ValueError("at least one reference is required")
    if not hyp_tokens:
        warnings.warn("scoring an empty hypothesis", stacklevel=2)
        return 0.0
    best = 0.0
    for ref_tokens in references:
        alignment = align(hyp_tokens, ref_tokens, stemmer, synonym_map)
        m = alignment.matches
        if m == 0:
            continue
        precision = m / len(hyp_tokens)
        recall = m / len(ref_tokens)
        fmean = 10 * precision * recall / (recall + 9 * precision)
        penalty = 0.5 * (alignment.chunks / m) ** 3
        best = max(best, fmean * (1 - penalty))
    return best


def corpus_score(
    hyp_stories: Sequence[Sequence[str]],
    ref_sets: Sequence[Sequence[Sequence[str]]],
    stemmer: Callable[[str], str] = stem,
    synonym_map: SynonymMap | None = None,
) -> float:
    """Mean meteor-lite over parallel hypothesis/reference lists."""
    if len(hyp_stories) != len(ref_sets):
        raise ValueError(
            f"{len(hyp_stories)} hypotheses vs {len(ref_sets)} reference sets"
        )
    if not hyp_stories:
        raise ValueError("empty corpus")
    scores = [
        meteor_lite(hyp, refs, stemmer, synonym_map)
        for hyp, refs in zip(hyp_stories, ref_sets)
    ]
    return sum(scores) / len(scores)


def parse_grid(spec: str) -> tuple[float, ...]:
    """Parse ``start:stop:step`` or a comma-separated list of values."""
    spec = spec.strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid spec must be start:stop:step, got {spec!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("grid step must be positive")
        values = []
        k = 0
        while True:
            value = round(start + k * step, 10)
            if value > stop + 1e-9:
                break
            values.append(value)
            k += 1
        return tuple(values)
    return tuple(round(float(p), 10) for p in spec.split(","))


DEFAULT_GRID = parse_grid("0:1:0.1")


@dataclass(frozen=True)
class TuneResult:
    rows: tuple[tuple[float, float, float, float], ...]  # alpha, beta, gamma, mean
    best_weights: Weights
    best_score: float
    per_story: tuple[float, ...]  # per-story scores at the best point


def tune(
    dev_stories: Sequence[Story],
    references: Sequence[Sequence[Sequence[str]]],
    profile: ThemeProfile,
    resources: ResourceSet,
    grid: Sequence[float] = DEFAULT_GRID,
    config: DecoderConfig | None = None,
    stemmer: Callable[[str], str] = stem,
    synonym_map: SynonymMap | None = None,
) -> TuneResult:
    """Exhaustive grid search over (alpha, beta, gamma) maximizing the metric.

    Ties resolve to the lexicographically smallest weight triple. Stories are
    prepared once; only the beam is re-run per grid point.
    """
    if not dev_stories:
        raise ValueError("empty development set")
    if len(dev_stories) != len(references):
        raise ValueError("one reference set per development story required")
    states: list[DecoderState] = [
        prepare_story(story, profile, resources, config) for story in dev_stories
    ]
    rows = []
    best: tuple[float, float, float] | None = None
    best_score = float("-inf")
    best_per_story: tuple[float, ...] = ()
    for alpha in grid:
        for beta in grid:
            for gamma in grid:
                weights = Weights(alpha=alpha, beta=beta, gamma=gamma)
                scores = []
                for state, refs in zip(states, references):
                    top = decode_prepared(state, weights)[0]
                    scores.append(
                        meteor_lite(top.text.split(), refs, stemmer, synonym_map)
                    )
                mean = sum(scores) / len(scores)
                rows.append((alpha, beta, gamma, mean))
                if mean > best_score:
                    best = (alpha, beta, gamma)
                    best_score = mean
                    best_per_story = tuple(scores)
    return TuneResult(
        rows=tuple(rows),
        best_weights=Weights(*best),
        best_score=best_score,
        per_story=best_per_story,
    )
