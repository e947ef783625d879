"""Python bindings for the asim knowledge-unit relatedness model."""

from ._asim import (
    AsimError,
    Config,
    ConfigError,
    DataError,
    Model,
    TrainConfig,
    Vocabulary,
    __version__,
    clean_text,
    evaluate,
    is_stop_word,
    metrics,
    porter_stem,
    synthetic_pairs,
    tokenize,
    train,
    unit_tokens,
)

LABELS = ("duplicate", "direct", "indirect", "isolated")


def encode_pair(vocab, record, max_len=250):
    """Token ids of both sides of a record dict with title/body/answers fields."""
    x = unit_tokens(record["x_title"], record.get("x_body", ""), record.get("x_answers", ""), max_len)
    y = unit_tokens(record["y_title"], record.get("y_body", ""), record.get("y_answers", ""), max_len)
    return vocab.encode(x), vocab.encode(y)


__all__ = [
    "AsimError",
    "Config",
    "ConfigError",
    "DataError",
    "LABELS",
    "Model",
    "TrainConfig",
    "Vocabulary",
    "__version__",
    "clean_text",
    "encode_pair",
    "evaluate",
    "is_stop_word",
    "metrics",
    "porter_stem",
    "synthetic_pairs",
    "tokenize",
    "train",
    "unit_tokens",
]
