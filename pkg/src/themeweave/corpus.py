"""CoNLL-U ingestion and the in-memory story representation.

The engine never tags or parses text itself: stories and theme corpora
arrive as CoNLL-U files produced by an external pipeline, with named
entity labels carried in the MISC column (``NER=PERSON`` by default).
Multi-word ranges (``1-2``) and empty nodes (``1.1``) are skipped.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

from .filters import FilterLists


class LexClass(str, Enum):
    NOUN = "noun"
    PROPN = "propn"
    VERB = "verb"
    ADJ = "adj"
    NUM = "num"
    FUNC = "func"


CONTENT_CLASSES = frozenset({LexClass.NOUN, LexClass.PROPN, LexClass.VERB, LexClass.ADJ})

_UPOS_TO_CLASS = {
    "NOUN": LexClass.NOUN,
    "PROPN": LexClass.PROPN,
    "VERB": LexClass.VERB,
    "ADJ": LexClass.ADJ,
    "NUM": LexClass.NUM,
}


class ConlluError(ValueError):
    """Malformed CoNLL-U input; message carries the 1-based line number."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class Token:
    index: int  # 1-based position within the sentence
    surface: str
    lemma: str
    pos: LexClass
    upos: str  # raw tag, kept so serialization round-trips
    ne_tag: str | None = None
    is_content: bool = False


@dataclass(frozen=True)
class DependencyArc:
    head: int  # 0 = root
    dependent: int
    label: str


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    arcs: tuple[DependencyArc, ...]  # one arc per token, ordered by dependent


@dataclass(frozen=True)
class Story:
    id: str
    sentences: tuple[Sentence, ...]
    content_positions: tuple[tuple[int, int], ...]

    def token_at(self, position: tuple[int, int]) -> Token:
        si, ti = position
        return self.sentences[si].tokens[ti - 1]


def _content_flag(pos: LexClass, surface: str, lemma: str, filters: FilterLists) -> bool:
    return pos in CONTENT_CLASSES and not filters.blocks_rewriting(surface, lemma)


def _content_positions(sentences: Iterable[Sentence]) -> tuple[tuple[int, int], ...]:
    positions = []
    for si, sentence in enumerate(sentences):
        for token in sentence.tokens:
            if token.is_content:
                positions.append((si, token.index))
    return tuple(positions)


def _parse_misc(misc: str, ne_misc_key: str) -> str | None:
    if misc in ("", "_"):
        return None
    for item in misc.split("|"):
        key, sep, value = item.partition("=")
        if sep and key == ne_misc_key:
            # "O" is the conventional outside tag: no entity
            return None if value in ("", "O", "_") else value
    return None


def read_conllu(path: str | Path, ne_misc_key: str = "NER") -> list[Story]:
    """Parse a CoNLL-U file into one Story per ``# newdoc`` group.

    Without any ``# newdoc`` marker the whole file is a single story.
    Content flags are computed with empty filter lists; call
    :func:`mark_content` afterwards to apply real ones.
    """
    empty = FilterLists()
    stories: list[Story] = []
    sentences: list[Sentence] = []
    pending: list[tuple[Token, int, str, int]] = []  # token, head, deprel, line_no
    doc_id: str | None = None
    doc_count = 0

    def flush_sentence() -> None:
        nonlocal pending
        if not pending:
            return
        n = len(pending)
        tokens = []
        arcs = []
        for token, head, deprel, line_no in pending:
            if head > n:
                raise ConlluError(f"HEAD {head} out of range for a {n}-token sentence", line_no)
            if head == token.index:
                raise ConlluError("self-loop: token depends on itself", line_no)
            tokens.append(token)
            arcs.append(DependencyArc(head=head, dependent=token.index, label=deprel))
        sentences.append(Sentence(tokens=tuple(tokens), arcs=tuple(arcs)))
        pending = []

    def flush_story() -> None:
        nonlocal sentences, doc_id, doc_count
        flush_sentence()
        if sentences:
            doc_count += 1
            story_id = doc_id if doc_id else f"doc{doc_count}"
            stories.append(
                Story(
                    id=story_id,
                    sentences=tuple(sentences),
                    content_positions=_content_positions(sentences),
                )
            )
        sentences = []
        doc_id = None

    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                flush_sentence()
                continue
            if line.startswith("#"):
                comment = line[1:].strip()
                if comment == "newdoc" or comment.startswith("newdoc "):
                    flush_story()
                    _, sep, value = comment.partition("=")
                    if sep:
                        doc_id = value.strip() or None
                continue
            fields = line.split("\t")
            if len(fields) != 10:
                raise ConlluError(f"expected 10 tab-separated columns, got {len(fields)}", line_no)
            tok_id, form, lemma, upos, _xpos, _feats, head, deprel, _deps, misc = fields
            if "-" in tok_id or "." in tok_id:
                continue  # multi-word range or empty node
            try:
                index = int(tok_id)
            except ValueError:
                raise ConlluError(f"non-integer token id {tok_id!r}", line_no) from None
            expected = pending[-1][0].index + 1 if pending else 1
            if index != expected:
                raise ConlluError(f"token id {index} out of sequence (expected {expected})", line_no)
            if head in ("", "_"):
                raise ConlluError("missing HEAD", line_no)
            if deprel in ("", "_"):
                raise ConlluError("missing DEPREL", line_no)
            try:
                head_idx = int(head)
            except ValueError:
                raise ConlluError(f"non-integer HEAD {head!r}", line_no) from None
            if head_idx < 0:
                raise ConlluError(f"negative HEAD {head_idx}", line_no)
            pos = _UPOS_TO_CLASS.get(upos, LexClass.FUNC)
            token = Token(
                index=index,
                surface=form,
                lemma=lemma,
                pos=pos,
                upos=upos,
                ne_tag=_parse_misc(misc, ne_misc_key),
                is_content=_content_flag(pos, form, lemma, empty),
            )
            pending.append((token, head_idx, deprel, line_no))
    flush_story()
    return stories


def mark_content(story: Story, filters: FilterLists) -> Story:
    """Recompute content flags under the given filter lists.

    Returns a new Story; the input is left untouched.
    """
    sentences = []
    for sentence in story.sentences:
        tokens = tuple(
            replace(token, is_content=_content_flag(token.pos, token.surface, token.lemma, filters))
            for token in sentence.tokens
        )
        sentences.append(Sentence(tokens=tokens, arcs=sentence.arcs))
    return Story(
        id=story.id,
        sentences=tuple(sentences),
        content_positions=_content_positions(sentences),
    )


def to_conllu(stories: Iterable[Story]) -> str:
    """Serialize stories back to CoNLL-U (the columns the reader consumes)."""
    lines = []
    for story in stories:
        lines.append(f"# newdoc id = {story.id}")
        for sentence in story.sentences:
            arc_by_dep = {arc.dependent: arc for arc in sentence.arcs}
            for token in sentence.tokens:
                arc = arc_by_dep[token.index]
                misc = f"NER={token.ne_tag}" if token.ne_tag else "_"
                lines.append(
                    "\t".join(
                        (
                            str(token.index),
                            token.surface,
                            token.lemma,
                            token.upos,
                            "_",
                            "_",
                            str(arc.head),
                            arc.label,
                            "_",
                            misc,
                        )
                    )
                )
            lines.append("")
    return "\n".join(lines) + ("\n" if lines else "")


def ne_key(token: Token) -> str | None:
    """Named-entity grouping key: the NE tag, or PROPN for untagged proper nouns."""
    if token.ne_tag:
        return token.ne_tag
    if token.pos is LexClass.PROPN:
        return "PROPN"
    return None


@dataclass(frozen=True)
class RewriteUnit:
    """One rewrite decision point: a content token or a contiguous NE span."""

    positions: tuple[tuple[int, int], ...]
    tokens: tuple[Token, ...]
    lexical_class: LexClass  # PROPN for NE spans, the token class otherwise

    @property
    def head_token(self) -> Token:
        return self.tokens[-1]

    @property
    def surface(self) -> str:
        return " ".join(token.surface for token in self.tokens)

    @property
    def sentence_index(self) -> int:
        return self.positions[0][0]


def rewrite_units(story: Story) -> tuple[RewriteUnit, ...]:
    """Group content positions into rewrite units, in document order.

    Contiguous tokens sharing a named-entity key collapse into one unit;
    every other content token is a unit of its own.
    """
    units: list[RewriteUnit] = []
    run: list[tuple[tuple[int, int], Token]] = []
    run_key: str | None = None

    def close_run() -> None:
        nonlocal run, run_key
        if run:
            positions, tokens = zip(*run)
            units.append(
                RewriteUnit(positions=positions, tokens=tokens, lexical_class=LexClass.PROPN)
            )
        run = []
        run_key = None

    for position in story.content_positions:
        token = story.token_at(position)
        key = ne_key(token)
        if key is None:
            close_run()
            units.append(
                RewriteUnit(positions=(position,), tokens=(token,), lexical_class=token.pos)
            )
            continue
        adjacent = (
            run
            and run[-1][0][0] == position[0]
            and run[-1][0][1] + 1 == position[1]
            and run_key == key
        )
        if not adjacent:
            close_run()
        run.append((position, token))
        run_key = key
    close_run()
    return tuple(units)
