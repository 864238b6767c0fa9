"""Scoring of rewrite assignments: thematicity, syntax, semantics.

Two routes compute the same quantity. The direct functions below rescore
an assignment from the raw resources and serve as the reference; the
StoryScorer precomputes per-story tables (via the kernels module) and
supports exact incremental deltas, which is what the beam decoder uses.
A full pass of deltas over any assignment order must reproduce the direct
total to within floating-point noise.

Score conventions, for a story broken into rewrite units:
  Th        sum of candidate saliences over replaced units (keep/delete: 0)
  Syn       sum of dependency log-likelihoods over all non-root arcs, with
            original words at unassigned endpoints, candidate head words at
            replaced endpoints; arcs touching a deleted unit, and arcs
            internal to a replaced unit, are skipped
  Sem_Lex   cos + taxonomy similarity of original vs. assigned word, for
            explicitly assigned units (keep scores its identity maximum)
  Sem_Pair  for each document-ordered pair of assigned, undeleted units:
            cos(o_u, o_v) * cos(w_u, w_v) + cos(w_u + o_v - o_u, w_v)
"""

from __future__ import annotations

from dataclasses import dataclass
from collections.abc import Mapping, Sequence

import numpy as np

from . import kernels
from .corpus import RewriteUnit, Story, rewrite_units
from .resources import ResourceSet, cosine_vectors, dep_loglik, resnik
from .theme import RewriteCandidate

SEM_FULL = "full"
SEM_LEX_COS = "lex-cos"  # ablation: cosine of the single-word mapping only


@dataclass(frozen=True)
class Weights:
    alpha: float = 0.1  # semantic coherence
    beta: float = 0.1  # syntactic compatibility
    gamma: float = 1.0  # thematicity


@dataclass(frozen=True)
class Outcome:
    kind: str  # "keep" | "replace" | "delete"
    candidate: RewriteCandidate | None = None


KEEP = Outcome("keep")
DELETE = Outcome("delete")


def replace_with(candidate: RewriteCandidate) -> Outcome:
    return Outcome("replace", candidate)


Assignment = Mapping[int, Outcome]  # rewrite-unit index -> outcome


@dataclass(frozen=True)
class ScoreBreakdown:
    th: float
    syn: float
    sem_lex: float
    sem_pair: float
    total: float


def combine(weights: Weights, th: float, syn: float, sem_lex: float, sem_pair: float,
            penalty: float = 0.0) -> float:
    return (
        weights.gamma * th
        + weights.beta * syn
        + weights.alpha * (sem_lex + sem_pair)
        + penalty
    )


def _unit_word(unit: RewriteUnit, outcome: Outcome | None) -> str | None:
    """Head word representing the unit under an outcome; None for delete."""
    if outcome is None or outcome.kind == "keep":
        return unit.head_token.surface
    if outcome.kind == "delete":
        return None
    return outcome.candidate.head_word


def score_th(assignment: Assignment) -> float:
    """Thematicity: candidate salience summed over replacements."""
    total = 0.0
    for outcome in assignment.values():
        if outcome.kind == "replace":
            total += outcome.candidate.salience
    return total


def _position_unit_map(units: Sequence[RewriteUnit]) -> dict[tuple[int, int], int]:
    mapping = {}
    for index, unit in enumerate(units):
        for position in unit.positions:
            mapping[position] = index
    return mapping


def score_syn(story: Story, assignment: Assignment, lm) -> float:
    """Dependency compatibility of the assignment against the source parse."""
    units = rewrite_units(story)
    unit_of = _position_unit_map(units)
    total = 0.0
    for si, sentence in enumerate(story.sentences):
        tokens = sentence.tokens
        for arc in sentence.arcs:
            if arc.head == 0:
                continue
            head_unit = unit_of.get((si, arc.head))
            dep_unit = unit_of.get((si, arc.dependent))
            head_outcome = assignment.get(head_unit) if head_unit is not None else None
            dep_outcome = assignment.get(dep_unit) if dep_unit is not None else None
            if head_outcome is not None and head_outcome.kind == "delete":
                continue
            if dep_outcome is not None and dep_outcome.kind == "delete":
                continue
            if head_unit is not None and head_unit == dep_unit:
                if head_outcome is not None and head_outcome.kind == "replace":
                    continue  # internal structure is replaced wholesale
                head_word = tokens[arc.head - 1].surface
                dep_word = tokens[arc.dependent - 1].surface
            else:
                head_word = (
                    tokens[arc.head - 1].surface
                    if head_unit is None or head_outcome is None or head_outcome.kind == "keep"
                    else head_outcome.candidate.head_word
                )
                dep_word = (
                    tokens[arc.dependent - 1].surface
                    if dep_unit is None or dep_outcome is None or dep_outcome.kind == "keep"
                    else dep_outcome.candidate.head_word
                )
            total += dep_loglik(head_word, arc.label, dep_word, lm)
    return total


def _lex_term(unit: RewriteUnit, outcome: Outcome, resources: ResourceSet, sem_mode: str) -> float:
    if outcome.kind == "delete":
        return 0.0
    table = resources.embeddings
    orig = unit.head_token
    if outcome.kind == "keep":
        vec = table.lookup(orig.surface)
        value = 1.0 if vec is not None and float(np.linalg.norm(vec)) > 0 else 0.0
        if sem_mode == SEM_FULL:
            value += resnik(orig.lemma, unit.lexical_class, orig.lemma, unit.lexical_class,
                            resources.taxonomy)
        return value
    candidate = outcome.candidate
    va = table.lookup(orig.surface)
    vb = table.lookup(candidate.head_word)
    value = cosine_vectors(va, vb) if va is not None and vb is not None else 0.0
    if sem_mode == SEM_FULL:
        value += resnik(orig.lemma, unit.lexical_class, candidate.head_lemma,
                        candidate.lexical_class, resources.taxonomy)
    return value


def score_sem_lex(story: Story, assignment: Assignment, resources: ResourceSet,
                  sem_mode: str = SEM_FULL) -> float:
    """Word-level semantic fit of each explicitly assigned unit."""
    units = rewrite_units(story)
    return sum(
        _lex_term(units[index], outcome, resources, sem_mode)
        for index, outcome in assignment.items()
    )


def score_sem_pair(story: Story, assignment: Assignment, resources: ResourceSet,
                   sem_mode: str = SEM_FULL) -> float:
    """Pairwise semantic coherence between assigned, undeleted units."""
    if sem_mode != SEM_FULL:
        return 0.0
    units = rewrite_units(story)
    table = resources.embeddings
    active = sorted(
        index for index, outcome in assignment.items() if outcome.kind != "delete"
    )
    total = 0.0
    for pos_i, u in enumerate(active):
        o_u = table.lookup(units[u].head_token.surface)
        w_u = _unit_word(units[u], assignment[u])
        c_u = table.lookup(w_u) if w_u is not None else None
        for v in active[pos_i + 1 :]:
            o_v = table.lookup(units[v].head_token.surface)
            w_v = _unit_word(units[v], assignment[v])
            c_v = table.lookup(w_v) if w_v is not None else None
            if o_u is None or o_v is None or c_u is None or c_v is None:
                continue
            pairsim = cosine_vectors(o_u, o_v) * cosine_vectors(c_u, c_v)
            analogy = cosine_vectors(c_u + o_v - o_u, c_v)
            total += pairsim + analogy
    return total


def score_total(
    story: Story,
    assignment: Assignment,
    resources: ResourceSet,
    weights: Weights,
    delete_penalty: float = float("-inf"),
    sem_mode: str = SEM_FULL,
) -> ScoreBreakdown:
    """Reference scorer: recompute every component from the raw resources."""
    th = score_th(assignment)
    syn = score_syn(story, assignment, resources.deplm)
    sem_lex = score_sem_lex(story, assignment, resources, sem_mode)
    sem_pair = score_sem_pair(story, assignment, resources, sem_mode)
    deletes = sum(1 for outcome in assignment.values() if outcome.kind == "delete")
    penalty = deletes * delete_penalty if deletes else 0.0
    total = combine(weights, th, syn, sem_lex, sem_pair, penalty)
    return ScoreBreakdown(th=th, syn=syn, sem_lex=sem_lex, sem_pair=sem_pair, total=total)


DELETE_INDEX = -1  # pseudo choice index used by the decoder


class StoryScorer:
    """Precomputed score tables for one story against fixed candidates.

    Choice index 0 always denotes the original word (used both for an
    explicit keep and for not-yet-assigned units); replacement candidates
    follow in list order. Deletion is the pseudo index -1 and is handled
    arithmetically (all its table contributions are zero).
    """

    def __init__(
        self,
        story: Story,
        units: Sequence[RewriteUnit],
        candidates: Sequence[Sequence[RewriteCandidate]],
        resources: ResourceSet,
        sem_mode: str = SEM_FULL,
    ):
        if len(units) != len(candidates):
            raise ValueError("one candidate list per rewrite unit required")
        self.story = story
        self.units = tuple(units)
        self.candidates = [tuple(c) for c in candidates]
        self.sem_mode = sem_mode
        self._build_tables(resources)

    # -- construction -------------------------------------------------

    def _build_tables(self, resources: ResourceSet) -> None:
        units = self.units
        table = resources.embeddings
        n_units = len(units)
        width = 1 + max((len(c) for c in self.candidates), default=0)
        dim = table.dim

        choice_vecs = np.zeros((n_units, width, dim))
        choice_valid = np.zeros((n_units, width), dtype=np.bool_)
        orig_vecs = np.zeros((n_units, dim))
        orig_valid = np.zeros(n_units, dtype=np.bool_)
        self.th_table = np.zeros((n_units, width))
        self.lex_table = np.zeros((n_units, width))

        for u, unit in enumerate(units):
            orig = unit.head_token
            vec = table.lookup(orig.surface)
            if vec is not None:
                orig_vecs[u] = vec
                orig_valid[u] = True
                choice_vecs[u, 0] = vec
                choice_valid[u, 0] = True
            self.lex_table[u, 0] = self._lex_value(unit, None, resources)
            for a, candidate in enumerate(self.candidates[u], start=1):
                cvec = table.lookup(candidate.head_word)
                if cvec is not None:
                    choice_vecs[u, a] = cvec
                    choice_valid[u, a] = True
                self.th_table[u, a] = candidate.salience
                self.lex_table[u, a] = self._lex_value(unit, candidate, resources)

        if self.sem_mode == SEM_FULL and n_units > 1:
            self.pair_table = kernels.pair_score_table(
                choice_vecs, choice_valid, orig_vecs, orig_valid
            )
        else:
            self.pair_table = np.zeros((n_units, width, n_units, width))

        self._build_syn_tables(resources)

    def _lex_value(self, unit: RewriteUnit, candidate: RewriteCandidate | None,
                   resources: ResourceSet) -> float:
        outcome = KEEP if candidate is None else replace_with(candidate)
        return _lex_term(unit, outcome, resources, self.sem_mode)

    def _choice_word(self, u: int, a: int, token_surface: str) -> str:
        return token_surface if a == 0 else self.candidates[u][a - 1].head_word

    def _build_syn_tables(self, resources: ResourceSet) -> None:
        lm = resources.deplm
        units = self.units
        unit_of = _position_unit_map(units)
        widths = [1 + len(c) for c in self.candidates]

        self.syn_const = 0.0
        self.syn_single = np.zeros_like(self.th_table)
        self.syn_pairs: dict[tuple[int, int], np.ndarray] = {}

        for si, sentence in enumerate(self.story.sentences):
            tokens = sentence.tokens
            for arc in sentence.arcs:
                if arc.head == 0:
                    continue
                head_surface = tokens[arc.head - 1].surface
                dep_surface = tokens[arc.dependent - 1].surface
                hu = unit_of.get((si, arc.head))
                du = unit_of.get((si, arc.dependent))
                if hu is None and du is None:
                    self.syn_const += dep_loglik(head_surface, arc.label, dep_surface, lm)
                elif hu is not None and hu == du:
                    # internal arc: scores only while the unit keeps its words
                    self.syn_single[hu, 0] += dep_loglik(
                        head_surface, arc.label, dep_surface, lm
                    )
                elif hu is not None and du is None:
                    for a in range(widths[hu]):
                        self.syn_single[hu, a] += dep_loglik(
                            self._choice_word(hu, a, head_surface), arc.label, dep_surface, lm
                        )
                elif hu is None and du is not None:
                    for a in range(widths[du]):
                        self.syn_single[du, a] += dep_loglik(
                            head_surface, arc.label, self._choice_word(du, a, dep_surface), lm
                        )
                else:
                    lo, hi = min(hu, du), max(hu, du)
                    matrix = self.syn_pairs.setdefault(
                        (lo, hi), np.zeros((widths[lo], widths[hi]))
                    )
                    for a in range(widths[hu]):
                        head_word = self._choice_word(hu, a, head_surface)
                        for b in range(widths[du]):
                            value = dep_loglik(
                                head_word, arc.label, self._choice_word(du, b, dep_surface), lm
                            )
                            if hu == lo:
                                matrix[a, b] += value
                            else:
                                matrix[b, a] += value

        self._pair_keys_by_unit: dict[int, list[tuple[int, int]]] = {}
        for lo, hi in self.syn_pairs:
            self._pair_keys_by_unit.setdefault(lo, []).append((lo, hi))
            self._pair_keys_by_unit.setdefault(hi, []).append((lo, hi))

        self.base_syn = float(
            self.syn_const
            + self.syn_single[:, 0].sum()
            + sum(matrix[0, 0] for matrix in self.syn_pairs.values())
        )

    # -- incremental scoring -------------------------------------------

    def empty_components(self) -> tuple[float, float, float, float]:
        """(th, syn, sem_lex, sem_pair) of the empty partial assignment."""
        return (0.0, self.base_syn, 0.0, 0.0)

    def delta_components(
        self, states: Sequence[int | None], unit: int, choice: int
    ) -> tuple[float, float, float, float]:
        """Component deltas for assigning `choice` at `unit`.

        states holds the current per-unit assignment: None when unassigned,
        DELETE_INDEX for deletion, otherwise a choice index. The target unit
        must be unassigned.
        """
        if states[unit] is not None:
            raise ValueError(f"unit {unit} is already assigned")
        if choice == DELETE_INDEX:
            d_th = 0.0
            d_lex = 0.0
            d_pair = 0.0
            d_syn = -float(self.syn_single[unit, 0])
            for lo, hi in self._pair_keys_by_unit.get(unit, ()):
                other = hi if lo == unit else lo
                other_state = states[other]
                if other_state == DELETE_INDEX:
                    continue  # arc already removed
                eff = other_state if other_state is not None else 0
                matrix = self.syn_pairs[(lo, hi)]
                old = matrix[0, eff] if lo == unit else matrix[eff, 0]
                d_syn -= float(old)
            return (d_th, d_syn, d_lex, d_pair)

        d_th = float(self.th_table[unit, choice])
        d_lex = float(self.lex_table[unit, choice])
        d_syn = float(self.syn_single[unit, choice] - self.syn_single[unit, 0])
        for lo, hi in self._pair_keys_by_unit.get(unit, ()):
            other = hi if lo == unit else lo
            other_state = states[other]
            if other_state == DELETE_INDEX:
                continue
            eff = other_state if other_state is not None else 0
            matrix = self.syn_pairs[(lo, hi)]
            if lo == unit:
                d_syn += float(matrix[choice, eff] - matrix[0, eff])
            else:
                d_syn += float(matrix[eff, choice] - matrix[eff, 0])
        d_pair = 0.0
        for other, other_state in enumerate(states):
            if other == unit or other_state is None or other_state == DELETE_INDEX:
                continue
            d_pair += float(self.pair_table[unit, choice, other, other_state])
        return (d_th, d_syn, d_lex, d_pair)

    # -- convenience ----------------------------------------------------

    def outcome_for(self, unit: int, choice: int) -> Outcome:
        if choice == DELETE_INDEX:
            return DELETE
        if choice == 0:
            return KEEP
        return replace_with(self.candidates[unit][choice - 1])

    def choice_for(self, unit: int, outcome: Outcome) -> int:
        if outcome.kind == "delete":
            return DELETE_INDEX
        if outcome.kind == "keep":
            return 0
        return 1 + self.candidates[unit].index(outcome.candidate)


def prepare(
    story: Story,
    candidates: Sequence[Sequence[RewriteCandidate]],
    resources: ResourceSet,
    sem_mode: str = SEM_FULL,
) -> StoryScorer:
    """Build a StoryScorer for the story's rewrite units."""
    return StoryScorer(story, rewrite_units(story), candidates, resources, sem_mode)


def delta_score(
    scorer: StoryScorer,
    states: Sequence[int | None],
    unit: int,
    outcome: Outcome,
    weights: Weights,
    delete_penalty: float = float("-inf"),
) -> ScoreBreakdown:
    """Breakdown delta for one assignment step (spec-level wrapper)."""
    choice = scorer.choice_for(unit, outcome)
    d_th, d_syn, d_lex, d_pair = scorer.delta_components(states, unit, choice)
    penalty = delete_penalty if choice == DELETE_INDEX else 0.0
    return ScoreBreakdown(
        th=d_th,
        syn=d_syn,
        sem_lex=d_lex,
        sem_pair=d_pair,
        total=combine(weights, d_th, d_syn, d_lex, d_pair, penalty),
    )
