"""Word filter lists gating which tokens may be rewritten or proposed."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


def load_filter_list(path: str | Path) -> frozenset[str]:
    """Read a plain-text word list: one term per line, ``#`` comments allowed.

    Entries are lowercased; blank lines are skipped.
    """
    terms = set()
    with open(path, encoding="utf-8") as handle:
        for raw in handle:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            terms.add(line.lower())
    return frozenset(terms)


@dataclass(frozen=True)
class FilterLists:
    """Stop, math, and offensive word sets; all entries lowercase."""

    stop_words: frozenset[str] = frozenset()
    math_words: frozenset[str] = frozenset()
    offensive_words: frozenset[str] = frozenset()

    @classmethod
    def load(
        cls,
        stop_path: str | Path | None = None,
        math_path: str | Path | None = None,
        offensive_path: str | Path | None = None,
    ) -> FilterLists:
        return cls(
            stop_words=load_filter_list(stop_path) if stop_path else frozenset(),
            math_words=load_filter_list(math_path) if math_path else frozenset(),
            offensive_words=load_filter_list(offensive_path) if offensive_path else frozenset(),
        )

    def blocks_rewriting(self, surface: str, lemma: str) -> bool:
        """True when a token must keep its original surface (stop or math word).

        Matching is case-insensitive on both surface and lemma.
        """
        for key in (surface.lower(), lemma.lower()):
            if key in self.stop_words or key in self.math_words:
                return True
        return False

    def blocks_candidate(self, surface: str) -> bool:
        """True when a theme word may not be proposed as a rewrite."""
        key = surface.lower()
        return (
            key in self.stop_words
            or key in self.math_words
            or key in self.offensive_words
        )
