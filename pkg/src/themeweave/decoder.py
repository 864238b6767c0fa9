"""Two-stage decoding: candidate lists, then stratified beam search.

Hypotheses are stratified by how many rewrite units they have assigned.
Every step extends a hypothesis at any one unassigned unit (so all
assignment orders compete in the same beam), hypotheses with identical
assignments are recombined, and each stratum keeps the top-B by total.
Fixed left-to-right and head-first orders are available for ablation.

Memory note: the pairwise table is O((units * candidates)^2) floats, which
is fine for story-problem inputs (tens of units) but not for book-length
documents.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from collections.abc import Mapping, Sequence

from .corpus import LexClass, RewriteUnit, Story, rewrite_units
from .resources import ResourceSet
from .scoring import (
    DELETE_INDEX,
    KEEP,
    Assignment,
    Outcome,
    ScoreBreakdown,
    StoryScorer,
    Weights,
    combine,
    replace_with,
)
from .theme import RewriteCandidate, ThemeProfile

ORDER_ANY = "any"
ORDER_LEFT_TO_RIGHT = "left-to-right"
ORDER_HEAD_FIRST = "head-first"

_DEFAULT_CLASS_MATCH = {
    LexClass.NOUN: LexClass.NOUN,
    LexClass.PROPN: LexClass.PROPN,
    LexClass.VERB: LexClass.VERB,
    LexClass.ADJ: LexClass.ADJ,
}


class EmptyCandidateListError(ValueError):
    """A rewrite unit has no outcomes to choose from."""

    def __init__(self, unit: RewriteUnit):
        si, ti = unit.positions[0]
        super().__init__(
            f"no candidates for {unit.lexical_class.value} unit"
            f" {unit.surface!r} at sentence {si + 1}, token {ti}"
        )
        self.position = unit.positions[0]


@dataclass(frozen=True)
class DecoderConfig:
    beam_width: int = 64
    n_best: int = 5
    allow_keep: bool = True
    delete_penalty: float = float("-inf")
    order: str = ORDER_ANY
    sem_mode: str = "full"
    class_match: Mapping[LexClass, LexClass] = field(
        default_factory=lambda: dict(_DEFAULT_CLASS_MATCH)
    )

    def __post_init__(self):
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")
        if self.n_best < 1 or self.n_best > self.beam_width:
            raise ValueError("n_best must be in 1..beam_width")
        if self.order not in (ORDER_ANY, ORDER_LEFT_TO_RIGHT, ORDER_HEAD_FIRST):
            raise ValueError(f"unknown order {self.order!r}")


@dataclass(frozen=True)
class Hypothesis:
    """Partial assignment plus its accumulated score components."""

    states: tuple  # per unit: None unassigned, -1 delete, else choice index
    th: float
    syn: float
    sem_lex: float
    sem_pair: float
    penalty: float
    assigned_count: int

    def total(self, weights: Weights) -> float:
        return combine(weights, self.th, self.syn, self.sem_lex, self.sem_pair, self.penalty)

    def breakdown(self, weights: Weights) -> ScoreBreakdown:
        return ScoreBreakdown(
            th=self.th,
            syn=self.syn,
            sem_lex=self.sem_lex,
            sem_pair=self.sem_pair,
            total=self.total(weights),
        )


@dataclass(frozen=True)
class RewriteResult:
    text: str
    assignment: dict[int, Outcome]
    breakdown: ScoreBreakdown


def candidate_lists(
    story: Story, profile: ThemeProfile, config: DecoderConfig | None = None
) -> dict[int, list[Outcome]]:
    """Outcome list per rewrite unit: keep, class-matched replacements, delete."""
    config = config or DecoderConfig()
    units = rewrite_units(story)
    allow_delete = config.delete_penalty > float("-inf")
    lists: dict[int, list[Outcome]] = {}
    for index, unit in enumerate(units):
        outcomes: list[Outcome] = []
        if config.allow_keep:
            outcomes.append(KEEP)
        target_class = config.class_match.get(unit.lexical_class, unit.lexical_class)
        for candidate in profile.candidates.get(target_class, ()):
            outcomes.append(replace_with(candidate))
        if allow_delete:
            outcomes.append(Outcome("delete"))
        if not outcomes:
            raise EmptyCandidateListError(unit)
        lists[index] = outcomes
    return lists


@dataclass
class DecoderState:
    """Story prepared for decoding; reusable across weight settings."""

    story: Story
    scorer: StoryScorer
    offers: list[list[int]]  # choice indices offered per unit
    config: DecoderConfig

    @property
    def units(self) -> tuple[RewriteUnit, ...]:
        return self.scorer.units


def prepare_story(
    story: Story,
    profile: ThemeProfile,
    resources: ResourceSet,
    config: DecoderConfig | None = None,
) -> DecoderState:
    config = config or DecoderConfig()
    lists = candidate_lists(story, profile, config)
    units = rewrite_units(story)
    replacements: list[list[RewriteCandidate]] = []
    offers: list[list[int]] = []
    for index in range(len(units)):
        outcomes = lists[index]
        cands = [o.candidate for o in outcomes if o.kind == "replace"]
        replacements.append(cands)
        unit_offers = []
        if any(o.kind == "keep" for o in outcomes):
            unit_offers.append(0)
        unit_offers.extend(range(1, len(cands) + 1))
        if any(o.kind == "delete" for o in outcomes):
            unit_offers.append(DELETE_INDEX)
        offers.append(unit_offers)
    scorer = StoryScorer(story, units, replacements, resources, config.sem_mode)
    return DecoderState(story=story, scorer=scorer, offers=offers, config=config)


def _head_first_order(story: Story, units: Sequence[RewriteUnit]) -> list[int]:
    unit_of = {}
    for index, unit in enumerate(units):
        for position in unit.positions:
            unit_of[position] = index
    order: list[int] = []
    seen = set()
    for si, sentence in enumerate(story.sentences):
        children: dict[int, list[int]] = {}
        for arc in sentence.arcs:
            children.setdefault(arc.head, []).append(arc.dependent)
        queue = sorted(children.get(0, []))
        while queue:
            token_index = queue.pop(0)
            unit = unit_of.get((si, token_index))
            if unit is not None and unit not in seen:
                seen.add(unit)
                order.append(unit)
            queue.extend(sorted(children.get(token_index, [])))
    for index in range(len(units)):
        if index not in seen:
            order.append(index)
    return order


def _sort_key(states: tuple) -> tuple:
    return tuple(-2 if s is None else s for s in states)


def decode_prepared(state: DecoderState, weights: Weights) -> list[RewriteResult]:
    """Run the beam over a prepared story and realize the n-best rewrites."""
    scorer = state.scorer
    config = state.config
    n_units = len(scorer.units)
    th, syn, lex, pair = scorer.empty_components()
    start = Hypothesis(
        states=(None,) * n_units,
        th=th,
        syn=syn,
        sem_lex=lex,
        sem_pair=pair,
        penalty=0.0,
        assigned_count=0,
    )

    if config.order == ORDER_LEFT_TO_RIGHT:
        fixed_order = list(range(n_units))
    elif config.order == ORDER_HEAD_FIRST:
        fixed_order = _head_first_order(state.story, scorer.units)
    else:
        fixed_order = None

    frontier = [start]
    for stratum in range(n_units):
        pool: dict[tuple, Hypothesis] = {}
        for hyp in frontier:
            if fixed_order is not None:
                targets = [fixed_order[stratum]]
            else:
                targets = [u for u in range(n_units) if hyp.states[u] is None]
            for unit in targets:
                for choice in state.offers[unit]:
                    new_states = hyp.states[:unit] + (choice,) + hyp.states[unit + 1 :]
                    if new_states in pool:
                        continue  # identical assignment, identical score
                    d_th, d_syn, d_lex, d_pair = scorer.delta_components(
                        hyp.states, unit, choice
                    )
                    penalty = hyp.penalty + (
                        config.delete_penalty if choice == DELETE_INDEX else 0.0
                    )
                    pool[new_states] = Hypothesis(
                        states=new_states,
                        th=hyp.th + d_th,
                        syn=hyp.syn + d_syn,
                        sem_lex=hyp.sem_lex + d_lex,
                        sem_pair=hyp.sem_pair + d_pair,
                        penalty=penalty,
                        assigned_count=hyp.assigned_count + 1,
                    )
        ranked = sorted(
            pool.values(), key=lambda h: (-h.total(weights), _sort_key(h.states))
        )
        frontier = ranked[: config.beam_width]

    results = []
    for hyp in frontier:
        assignment = {
            unit: scorer.outcome_for(unit, choice)
            for unit, choice in enumerate(hyp.states)
        }
        text = _realize_units(state.story, scorer.units, assignment)
        results.append(
            RewriteResult(text=text, assignment=assignment, breakdown=hyp.breakdown(weights))
        )
    results.sort(key=lambda r: (-r.breakdown.total, r.text))
    return results[: config.n_best]


def decode(
    story: Story,
    profile: ThemeProfile,
    resources: ResourceSet,
    weights: Weights | None = None,
    config: DecoderConfig | None = None,
) -> list[RewriteResult]:
    """Candidate construction plus beam search over one story."""
    state = prepare_story(story, profile, resources, config)
    return decode_prepared(state, weights or Weights())


_CLITICS = {"'s", "'re", "'ve", "'ll", "'d", "'m", "n't"}


def _attaches_left(token: str) -> bool:
    if token.lower() in _CLITICS:
        return True
    return all(not ch.isalnum() for ch in token)


def _detokenize(tokens: Sequence[str]) -> str:
    text = ""
    for token in tokens:
        if text and not _attaches_left(token):
            text += " "
        text += token
    return text


def _realize_units(
    story: Story, units: Sequence[RewriteUnit], assignment: Assignment
) -> str:
    unit_of = {}
    for index, unit in enumerate(units):
        for position in unit.positions:
            unit_of[position] = index
    sentence_texts = []
    for si, sentence in enumerate(story.sentences):
        out_tokens: list[str] = []
        first_original = sentence.tokens[0].surface if sentence.tokens else ""
        for token in sentence.tokens:
            position = (si, token.index)
            index = unit_of.get(position)
            outcome = assignment.get(index) if index is not None else None
            if outcome is None or outcome.kind == "keep":
                out_tokens.append(token.surface)
            elif outcome.kind == "delete":
                continue
            elif position == units[index].positions[0]:
                out_tokens.extend(outcome.candidate.tokens)
            # later tokens of a replaced span are dropped
        if not out_tokens:
            continue
        if first_original[:1].isupper() and out_tokens[0][:1].islower():
            out_tokens[0] = out_tokens[0][0].upper() + out_tokens[0][1:]
        sentence_texts.append(_detokenize(out_tokens))
    return " ".join(sentence_texts)


def realize(story: Story, assignment: Assignment) -> str:
    """Render a full assignment as text.

    Replacements are spliced in at the unit's first token, deletions drop
    the unit, and everything else is verbatim; numbers and function words
    always survive because they are never rewrite units.
    """
    return _realize_units(story, rewrite_units(story), assignment)
