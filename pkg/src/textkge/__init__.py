"""Knowledge-graph link prediction over free-text entities: text encoders
(CNN / BiLSTM) feed standard KGE scorers (TransE-style translation, TuckER-
style trilinear), with a filtered-ranking evaluation harness and tooling for
dataset statistics and generated-output overlap analysis."""

__version__ = "0.1.0"

from .config import ModelConfig, RunConfig, TrainConfig
from .data import (Dataset, RawTuple, Vocabulary, build_dataset, compute_stats,
                   load_dataset, load_tuples, normalize_text, word_coverage)
from .evaluation import build_filter_index, evaluate, filtered_rank
from .model import Model

__all__ = [
    "Dataset", "Model", "ModelConfig", "RawTuple", "RunConfig", "TrainConfig",
    "Vocabulary", "build_dataset", "build_filter_index", "compute_stats",
    "evaluate", "filtered_rank", "load_dataset", "load_tuples",
    "normalize_text", "word_coverage",
]
