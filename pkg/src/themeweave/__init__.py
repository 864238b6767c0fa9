"""Theme rewriting for short stories.

Given a dependency-parsed story and a theme corpus, substitute thematically
salient words while scoring syntactic and semantic coherence against the
original, searching the rewrite space with a recombining beam.
"""

from .corpus import (
    LexClass,
    Story,
    mark_content,
    read_conllu,
    rewrite_units,
    to_conllu,
)
from .decoder import DecoderConfig, RewriteResult, candidate_lists, decode, realize
from .evaluate import corpus_score, meteor_lite, tune
from .filters import FilterLists
from .resources import (
    ResourceSet,
    cosine,
    dep_loglik,
    load_embeddings,
    load_taxonomy,
    resnik,
    train_deplm,
)
from .scoring import (
    DELETE,
    KEEP,
    Outcome,
    ScoreBreakdown,
    Weights,
    replace_with,
    score_total,
)
from .theme import (
    RewriteCandidate,
    ThemeProfile,
    build_profile,
    load_profile,
    salience_ne,
    salience_tfidf,
    save_profile,
)

__version__ = "0.1.0"

__all__ = [
    "DecoderConfig",
    "DELETE",
    "FilterLists",
    "KEEP",
    "LexClass",
    "Outcome",
    "ResourceSet",
    "RewriteCandidate",
    "RewriteResult",
    "ScoreBreakdown",
    "Story",
    "ThemeProfile",
    "Weights",
    "build_profile",
    "candidate_lists",
    "corpus_score",
    "cosine",
    "decode",
    "dep_loglik",
    "load_embeddings",
    "load_profile",
    "load_taxonomy",
    "mark_content",
    "meteor_lite",
    "read_conllu",
    "realize",
    "replace_with",
    "resnik",
    "rewrite_units",
    "salience_ne",
    "salience_tfidf",
    "save_profile",
    "score_total",
    "to_conllu",
    "train_deplm",
    "tune",
]
