"""Python access to the zrk core: quantization, lexical lookup, segmentation and language models."""

from ._zrk import (
    Codebook,
    Metric,
    NGramLM,
    UnigramLM,
    ZrkError,
    __version__,
    assign,
    centroid_average,
    distance_table,
    edit_distance,
    kmeans_fit,
    lookup_score,
    nullspace_basis,
    read_zrk1,
    spearman,
    subsequence_dtw,
    train_ngram,
    train_unigram,
    write_zrk1,
)

__all__ = [
    "Codebook",
    "Metric",
    "NGramLM",
    "UnigramLM",
    "ZrkError",
    "__version__",
    "assign",
    "centroid_average",
    "distance_table",
    "edit_distance",
    "kmeans_fit",
    "lookup_score",
    "nullspace_basis",
    "read_zrk1",
    "spearman",
    "subsequence_dtw",
    "train_ngram",
    "train_unigram",
    "write_zrk1",
]
