"""Sparse non-negative matrix language modeling toolkit."""

try:
    from . import _snm  # installed layout: extension inside the package
except ImportError:
    import _snm  # build-tree layout: extension directory on sys.path

__all__ = [
    "SENTENCE_BEGIN",
    "SENTENCE_END",
    "UNKNOWN",
    "ConfigError",
    "CountStore",
    "EvalReport",
    "Event",
    "Feature",
    "InputError",
    "MetafeatureConfig",
    "SnmLookupError",
    "SnmModel",
    "Template",
    "TrainerConfig",
    "Vocabulary",
    "WeightTable",
    "interpolate",
    "make_events",
    "oov_rate",
    "optimize_weights",
    "parse_templates",
    "perplexity",
    "sentence_logprob",
    "tokenize",
    "tokenize_text",
    "train_corpus",
]

for _name in __all__:
    globals()[_name] = getattr(_snm, _name)
del _name
