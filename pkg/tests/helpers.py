"""Shared builders for toy stories, resources, and randomized instances."""

from __future__ import annotations

import itertools

import numpy as np

from themeweave.corpus import (
    CONTENT_CLASSES,
    DependencyArc,
    LexClass,
    Sentence,
    Story,
    Token,
    rewrite_units,
)
from themeweave.decoder import DecoderConfig, candidate_lists
from themeweave.resources import EmbeddingTable, ResourceSet, train_deplm, load_taxonomy
from themeweave.scoring import Weights, score_total
from themeweave.decoder import realize
from themeweave.theme import RewriteCandidate, ThemeProfile

_UPOS_TO_CLASS = {
    "NOUN": LexClass.NOUN,
    "PROPN": LexClass.PROPN,
    "VERB": LexClass.VERB,
    "ADJ": LexClass.ADJ,
    "NUM": LexClass.NUM,
}


def make_story(sentences, story_id="s1"):
    """Build a Story from rows of (surface, lemma, upos, head, label[, ne])."""
    built = []
    for rows in sentences:
        tokens = []
        arcs = []
        for position, row in enumerate(rows, start=1):
            surface, lemma, upos, head, label = row[:5]
            ne_tag = row[5] if len(row) > 5 else None
            pos = _UPOS_TO_CLASS.get(upos, LexClass.FUNC)
            tokens.append(
                Token(
                    index=position,
                    surface=surface,
                    lemma=lemma,
                    pos=pos,
                    upos=upos,
                    ne_tag=ne_tag,
                    is_content=pos in CONTENT_CLASSES,
                )
            )
            arcs.append(DependencyArc(head=head, dependent=position, label=label))
        built.append(Sentence(tokens=tuple(tokens), arcs=tuple(arcs)))
    positions = tuple(
        (si, token.index)
        for si, sentence in enumerate(built)
        for token in sentence.tokens
        if token.is_content
    )
    return Story(id=story_id, sentences=tuple(built), content_positions=positions)


def make_embeddings(vectors):
    """EmbeddingTable from {word: iterable of floats}; keys are case-folded."""
    arrays = {w.lower(): np.asarray(v, dtype=np.float64) for w, v in vectors.items()}
    dims = {a.size for a in arrays.values()}
    assert len(dims) == 1, "inconsistent toy vector dimensions"
    return EmbeddingTable(dim=dims.pop(), vectors=arrays)


def make_deplm(tmp_path, rows):
    """DepLM trained from (head, label, dep, count) rows."""
    path = tmp_path / "deplm.tsv"
    path.write_text("".join(f"{h}\t{l}\t{d}\t{c}\n" for h, l, d, c in rows))
    return train_deplm(path)


def make_taxonomy(tmp_path, edges, lemmas, freqs=None):
    """Taxonomy from (child, parent) edges and (lemma, class, concept) rows."""
    edges_path = tmp_path / "edges.tsv"
    edges_path.write_text("".join(f"{c}\t{p}\n" for c, p in edges))
    lemmas_path = tmp_path / "lemmas.tsv"
    lemmas_path.write_text("".join(f"{l}\t{c}\t{s}\n" for l, c, s in lemmas))
    freq_path = None
    if freqs is not None:
        freq_path = tmp_path / "freq.tsv"
        freq_path.write_text("".join(f"{c}\t{n}\n" for c, n in freqs))
    return load_taxonomy(edges_path, lemmas_path, freq_path)


def animal_taxonomy(tmp_path):
    """The 4-node toy: root -> animal -> {dog, puppy}, unit counts."""
    return make_taxonomy(
        tmp_path,
        edges=[("animal", "root"), ("dog", "animal"), ("puppy", "animal")],
        lemmas=[("dog", "noun", "dog"), ("puppy", "noun", "puppy")],
    )


def empty_profile(**candidate_lists_by_class):
    """Hand-rolled profile carrying only candidates."""
    candidates = {
        LexClass.NOUN: (),
        LexClass.VERB: (),
        LexClass.ADJ: (),
        LexClass.PROPN: (),
    }
    for key, cands in candidate_lists_by_class.items():
        candidates[LexClass(key)] = tuple(cands)
    return ThemeProfile(
        name="toy",
        version="1",
        k_max=50,
        compound_len=3,
        salience={},
        ne_inventory=(),
        compounds=(),
        candidates=candidates,
    )


def cand(surface, salience, cls=LexClass.NOUN, tokens=None, head_lemma=None):
    tokens = tuple(tokens) if tokens else (surface,)
    return RewriteCandidate(
        tokens=tokens,
        head_lemma=head_lemma or tokens[-1].lower(),
        lexical_class=cls,
        salience=salience,
    )


_LABELS = ("nsubj", "obj", "obl", "amod", "nummod")
_FUNC_WORDS = ("the", "of", "and", "to")


def random_instance(seed, tmp_path, max_units=4, max_cands=4, allow_delete=False):
    """A randomized toy decoding problem with dense enough resources.

    Returns (story, profile, resources, weights, config).
    """
    rng = np.random.default_rng(seed)
    n_content = int(rng.integers(2, max_units + 1))

    rows = []
    content_specs = []
    for i in range(n_content):
        if rng.random() < 0.35:
            rows.append((_FUNC_WORDS[int(rng.integers(len(_FUNC_WORDS)))], "_f", "ADP"))
        if rng.random() < 0.2:
            rows.append((f"{rng.integers(1, 99)}", "_n", "NUM"))
        cls = ("NOUN", "VERB", "ADJ")[int(rng.integers(3))]
        word = f"src{i}"
        rows.append((word, word, cls))
        content_specs.append((word, cls))
    rows.append((".", ".", "PUNCT"))

    sentence = []
    for position, (surface, lemma, upos) in enumerate(rows, start=1):
        head = int(rng.integers(0, position))  # head strictly before: acyclic
        label = _LABELS[int(rng.integers(len(_LABELS)))]
        sentence.append((surface, lemma, upos, head, label))
    story = make_story([sentence], story_id=f"rand{seed}")

    theme_words = [f"cand{seed}_{j}" for j in range(3 * max_cands)]
    by_class = {"noun": [], "verb": [], "adj": []}
    pool = iter(theme_words)
    for cls in by_class:
        k = int(rng.integers(1, max_cands + 1))
        for _ in range(k):
            word = next(pool)
            by_class[cls].append(cand(word, float(np.round(rng.random(), 3)), LexClass(cls)))
    profile = empty_profile(**by_class)

    vocab = (
        [surface for surface, _, _ in rows]
        + theme_words
        + list(_FUNC_WORDS)
    )
    vectors = {}
    for word in vocab:
        if rng.random() < 0.15:
            continue  # leave some words out of vocabulary
        vectors[word] = rng.normal(size=4)
    vectors.setdefault("anchor", rng.normal(size=4))
    embeddings = make_embeddings(vectors)

    lm_rows = []
    words = [surface for surface, _, _ in rows] + theme_words
    for _ in range(20):
        h = words[int(rng.integers(len(words)))]
        d = words[int(rng.integers(len(words)))]
        label = _LABELS[int(rng.integers(len(_LABELS)))]
        lm_rows.append((h, label, d, int(rng.integers(1, 5))))
    deplm = make_deplm(tmp_path, lm_rows)

    concepts = [("animal", "root"), ("dog", "animal"), ("puppy", "animal"), ("tool", "root")]
    lemma_rows = []
    for word, cls in content_specs:
        if rng.random() < 0.5:
            concept = ("dog", "puppy", "animal", "tool")[int(rng.integers(4))]
            lemma_rows.append((word, "noun" if cls != "VERB" else "verb", concept))
    for candidate_list in by_class.values():
        for candidate in candidate_list:
            if rng.random() < 0.5:
                concept = ("dog", "puppy", "animal", "tool")[int(rng.integers(4))]
                lemma_rows.append((candidate.head_lemma, candidate.lexical_class.value, concept))
    lemma_rows.append(("dog", "noun", "dog"))
    taxonomy = make_taxonomy(tmp_path, concepts, lemma_rows)

    resources = ResourceSet(embeddings=embeddings, deplm=deplm, taxonomy=taxonomy)
    weights = Weights(
        alpha=float(np.round(rng.random() * 2, 3)),
        beta=float(np.round(rng.random() * 2, 3)),
        gamma=float(np.round(rng.random() * 2, 3)),
    )
    config = DecoderConfig(
        beam_width=64,
        n_best=5,
        allow_keep=True,
        delete_penalty=-0.75 if allow_delete and rng.random() < 0.5 else float("-inf"),
    )
    return story, profile, resources, weights, config


def outcome_lists(story, profile, config):
    lists = candidate_lists(story, profile, config)
    return [lists[index] for index in range(len(lists))]


def brute_force(story, profile, resources, weights, config):
    """Enumerate every full assignment and rank like the decoder does."""
    lists = outcome_lists(story, profile, config)
    scored = []
    for combo in itertools.product(*lists):
        assignment = dict(enumerate(combo))
        breakdown = score_total(
            story,
            assignment,
            resources,
            weights,
            delete_penalty=config.delete_penalty,
            sem_mode=config.sem_mode,
        )
        scored.append((breakdown.total, realize(story, assignment), assignment))
    scored.sort(key=lambda item: (-item[0], item[1]))
    return scored


def search_space_size(story, profile, config):
    lists = outcome_lists(story, profile, config)
    size = 1
    for entry in lists:
        size *= len(entry)
    return size


def random_full_assignment(rng, story, profile, config):
    lists = outcome_lists(story, profile, config)
    return {
        index: entry[int(rng.integers(len(entry)))] for index, entry in enumerate(lists)
    }
