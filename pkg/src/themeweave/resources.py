"""Shared linguistic resources: embeddings, dependency LM, taxonomy.

All three are plain-text artifacts produced offline; once loaded they are
immutable and safe to query from any number of threads. Word lookups are
case-folded throughout.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import LexClass

BACKOFF = 0.4


class ResourceFormatError(ValueError):
    """Malformed resource file; message carries the 1-based line number."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass
class EmbeddingTable:
    dim: int
    vectors: dict[str, np.ndarray]

    def lookup(self, word: str) -> np.ndarray | None:
        return self.vectors.get(word.lower())

    def __contains__(self, word: str) -> bool:
        return word.lower() in self.vectors


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Read a text embedding table: optional ``count dim`` header, then
    ``word v1 ... vd`` lines. Duplicate words keep the first occurrence."""
    dim: int | None = None
    vectors: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            parts = raw.rstrip("\n").split()
            if not parts:
                continue
            if line_no == 1 and len(parts) == 2:
                try:
                    int(parts[0])
                    dim = int(parts[1])
                    continue
                except ValueError:
                    pass  # not a header after all
            word = parts[0].lower()
            try:
                values = np.array([float(v) for v in parts[1:]], dtype=np.float64)
            except ValueError:
                raise ResourceFormatError("non-numeric vector component", line_no) from None
            if values.size == 0:
                raise ResourceFormatError("vector has no components", line_no)
            if dim is None:
                dim = values.size
            elif values.size != dim:
                raise ResourceFormatError(
                    f"expected {dim} components, got {values.size}", line_no
                )
            if word not in vectors:
                vectors[word] = values
    if dim is None:
        raise ValueError(f"{path}: no vectors found")
    return EmbeddingTable(dim=dim, vectors=vectors)


def cosine_vectors(a: np.ndarray, b: np.ndarray) -> float:
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def cosine(a: str, b: str, table: EmbeddingTable) -> float:
    """Cosine similarity of two words; 0 for out-of-vocabulary or zero-norm."""
    va = table.lookup(a)
    vb = table.lookup(b)
    if va is None or vb is None:
        return 0.0
    return cosine_vectors(va, vb)


@dataclass
class DepLM:
    """Counts for a 3-gram model over dependency triples (head, label, dep)."""

    trigram: dict[tuple[str, str, str], int] = field(default_factory=dict)
    trigram_ctx: dict[tuple[str, str], int] = field(default_factory=dict)
    bigram: dict[tuple[str, str], int] = field(default_factory=dict)
    bigram_ctx: dict[str, int] = field(default_factory=dict)
    unigram: dict[str, int] = field(default_factory=dict)
    total: int = 0
    backoff: float = BACKOFF

    @property
    def vocab_size(self) -> int:
        return len(self.unigram)


def train_deplm(path: str | Path) -> DepLM:
    """Aggregate a ``head \\t label \\t dep \\t count`` TSV into a DepLM."""
    lm = DepLM()
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ResourceFormatError(
                    f"expected 4 tab-separated fields, got {len(parts)}", line_no
                )
            head, label, dep, count_text = parts
            try:
                count = int(count_text)
            except ValueError:
                raise ResourceFormatError(f"non-integer count {count_text!r}", line_no) from None
            if count < 1:
                raise ResourceFormatError(f"count must be >= 1, got {count}", line_no)
            head = head.lower()
            dep = dep.lower()
            key3 = (head, label, dep)
            lm.trigram[key3] = lm.trigram.get(key3, 0) + count
            lm.trigram_ctx[(head, label)] = lm.trigram_ctx.get((head, label), 0) + count
            lm.bigram[(label, dep)] = lm.bigram.get((label, dep), 0) + count
            lm.bigram_ctx[label] = lm.bigram_ctx.get(label, 0) + count
            lm.unigram[dep] = lm.unigram.get(dep, 0) + count
            lm.total += count
    return lm


def dep_loglik(head: str, label: str, dep: str, lm: DepLM) -> float:
    """Stupid-backoff log-probability of the dependent given (head, label).

    Always <= 0; unseen events back off through (label, dep) counts down to
    an add-one unigram floor.
    """
    head = head.lower()
    dep = dep.lower()
    c3 = lm.trigram.get((head, label, dep), 0)
    if c3 > 0:
        return math.log(c3 / lm.trigram_ctx[(head, label)])
    score = math.log(lm.backoff)
    c2 = lm.bigram.get((label, dep), 0)
    if c2 > 0:
        return score + math.log(c2 / lm.bigram_ctx[label])
    c1 = lm.unigram.get(dep, 0)
    return score + math.log(lm.backoff) + math.log((c1 + 1) / (lm.total + lm.vocab_size))


@dataclass
class Taxonomy:
    """Single-rooted is-a DAG with information content per concept."""

    parents: dict[str, tuple[str, ...]]
    root: str
    lemma_index: dict[tuple[str, str], frozenset[str]]
    ic: dict[str, float]
    ic_max: float
    ancestors: dict[str, frozenset[str]]  # includes the concept itself


def _ancestor_sets(parents: dict[str, tuple[str, ...]]) -> dict[str, frozenset[str]]:
    cache: dict[str, frozenset[str]] = {}

    def visit(concept: str, trail: tuple[str, ...]) -> frozenset[str]:
        if concept in cache:
            return cache[concept]
        if concept in trail:
            cycle = " -> ".join(trail + (concept,))
            raise ValueError(f"cycle in taxonomy: {cycle}")
        collected = {concept}
        for parent in parents[concept]:
            collected |= visit(parent, trail + (concept,))
        result = frozenset(collected)
        cache[concept] = result
        return result

    for concept in parents:
        visit(concept, ())
    return cache


_TAXONOMY_CLASS_ALIASES = {
    "propn": "noun",
    "n": "noun",
    "v": "verb",
    "a": "adj",
    "adjective": "adj",
}


def _taxonomy_class(value: str | LexClass) -> str:
    name = value.value if isinstance(value, LexClass) else str(value)
    name = name.lower()
    return _TAXONOMY_CLASS_ALIASES.get(name, name)


def load_taxonomy(
    edges_path: str | Path,
    lemma_map_path: str | Path,
    freq_path: str | Path | None = None,
) -> Taxonomy:
    """Load an is-a taxonomy and compute information content.

    Counts (unit by default, overridable per concept via the frequency file)
    propagate from every concept to all its ancestors; ic = -log of the
    resulting probability, so the root always has ic 0.
    """
    parents: dict[str, tuple[str, ...]] = {}
    with open(edges_path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ResourceFormatError("expected child<TAB>parent", line_no)
            child, parent = parts
            parents.setdefault(parent, ())
            parents[child] = parents.get(child, ()) + (parent,)
    if not parents:
        raise ValueError(f"{edges_path}: no edges found")

    roots = [concept for concept, ps in parents.items() if not ps]
    if len(roots) > 1:
        raise ValueError(f"multiple taxonomy roots: {sorted(roots)}")
    if not roots:
        raise ValueError("taxonomy has no root (cycle through every concept)")
    root = roots[0]

    ancestors = _ancestor_sets(parents)

    base = {concept: 1 for concept in parents}
    if freq_path is not None:
        with open(freq_path, encoding="utf-8") as handle:
            for line_no, raw in enumerate(handle, start=1):
                line = raw.rstrip("\n")
                if not line.strip() or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise ResourceFormatError("expected concept<TAB>count", line_no)
                concept, count_text = parts
                if concept not in parents:
                    raise ResourceFormatError(f"unknown concept {concept!r}", line_no)
                try:
                    count = int(count_text)
                except ValueError:
                    raise ResourceFormatError(
                        f"non-integer count {count_text!r}", line_no
                    ) from None
                if count < 0:
                    raise ResourceFormatError("negative count", line_no)
                base[concept] = count

    cumulative: Counter = Counter()
    for concept, weight in base.items():
        for ancestor in ancestors[concept]:
            cumulative[ancestor] += weight
    root_mass = cumulative[root]
    if root_mass <= 0:
        raise ValueError("taxonomy has zero total mass")
    ic = {
        concept: math.log(root_mass) - math.log(cumulative[concept])
        for concept in parents
        if cumulative[concept] > 0
    }
    for concept in parents:
        ic.setdefault(concept, math.log(root_mass))  # zero-mass leaves: maximal surprise
    ic_max = max(ic.values())

    lemma_index: dict[tuple[str, str], set[str]] = {}
    with open(lemma_map_path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ResourceFormatError("expected lemma<TAB>class<TAB>concept", line_no)
            lemma, cls, concept = parts
            if concept not in parents:
                raise ResourceFormatError(f"unknown concept {concept!r}", line_no)
            key = (lemma.lower(), _taxonomy_class(cls))
            lemma_index.setdefault(key, set()).add(concept)

    return Taxonomy(
        parents=parents,
        root=root,
        lemma_index={key: frozenset(values) for key, values in lemma_index.items()},
        ic=ic,
        ic_max=ic_max,
        ancestors=ancestors,
    )


def resnik(
    lemma_a: str,
    class_a: str | LexClass,
    lemma_b: str,
    class_b: str | LexClass,
    tax: Taxonomy,
) -> float:
    """Information content of the lowest common subsumer, scaled to [0, 1].

    0 when either lemma is unmapped or the only shared subsumer is the root.
    """
    concepts_a = tax.lemma_index.get((lemma_a.lower(), _taxonomy_class(class_a)))
    concepts_b = tax.lemma_index.get((lemma_b.lower(), _taxonomy_class(class_b)))
    if not concepts_a or not concepts_b or tax.ic_max == 0:
        return 0.0
    best = 0.0
    for ca in concepts_a:
        anc_a = tax.ancestors[ca]
        for cb in concepts_b:
            shared = anc_a & tax.ancestors[cb]
            if not shared:
                continue
            best = max(best, max(tax.ic[c] for c in shared))
    return best / tax.ic_max


@dataclass
class ResourceSet:
    embeddings: EmbeddingTable
    deplm: DepLM
    taxonomy: Taxonomy


def load_resources(
    embeddings_path: str | Path,
    deplm_path: str | Path,
    taxonomy_edges: str | Path,
    taxonomy_lemmas: str | Path,
    taxonomy_freq: str | Path | None = None,
) -> ResourceSet:
    return ResourceSet(
        embeddings=load_embeddings(embeddings_path),
        deplm=train_deplm(deplm_path),
        taxonomy=load_taxonomy(taxonomy_edges, taxonomy_lemmas, taxonomy_freq),
    )
