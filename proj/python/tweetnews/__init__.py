"""Tweets to news-style paragraphs: Python bindings over the C++ core."""

from ._core import (
    BleuReport,
    ConfigError,
    CorruptionStats,
    DataError,
    Error,
    NumericError,
    ShapeError,
    Vocab,
    bleu,
    bleu_multi,
    build_merge_pairs,
    config_keys,
    corrupt,
    filter_by_similarity,
    fleiss_kappa,
    generate_templated,
    keyword_filter,
    kmeans,
    run_pipeline,
    welch_t,
)

__version__ = "0.1.0"
