from ._claimpkg import (
    KnowledgeGraph,
    build_training_example,
    coverage,
    entity_correctness,
    levenshtein,
    normalize_label,
    parse_pseudo_subgraph,
    retrieve,
    sim_exact,
    sim_fuzzy,
    toggle_inverse,
    unique_triplet_count,
)

__all__ = [
    "KnowledgeGraph",
    "build_training_example",
    "coverage",
    "entity_correctness",
    "levenshtein",
    "normalize_label",
    "parse_pseudo_subgraph",
    "retrieve",
    "sim_exact",
    "sim_fuzzy",
    "toggle_inverse",
    "unique_triplet_count",
]
