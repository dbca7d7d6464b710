"""Filtered ranking and the MR / MRR / Hits@10/3/1 metric suite."""

import json
import math
import os
from dataclasses import dataclass

import numpy as np
import torch

from .data import Dataset
from .model import Model


@dataclass
class RankingResult:
    tuple: tuple[int, int, int]
    rank: int
    candidate_count: int


@dataclass
class MetricsReport:
    mr: float
    mrr: float
    hits10: float
    hits3: float
    hits1: float
    n: int

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n, "MR": self.mr, "MRR": self.mrr,
            "Hits@10": self.hits10, "Hits@3": self.hits3, "Hits@1": self.hits1,
            "orientation": "lower MR, higher MRR and Hits are better",
        }, indent=2)


def build_filter_index(ds: Dataset) -> dict[tuple[int, int], set[int]]:
    """(source, relation) -> all known-true targets over train/dev/test."""
    index: dict[tuple[int, int], set[int]] = {}
    for split in (ds.train, ds.dev, ds.test):
        for s, r, t in split:
            index.setdefault((s, r), set()).add(t)
    return index


def filtered_rank(scores: np.ndarray, gold: int, known_true) -> int:
    """Rank of the gold candidate after removing other known-true targets.

    Ties share the mid-rank: 1 + #strictly-greater + ceil(#equal / 2).
    """
    if gold < 0 or gold >= len(scores):
        raise ValueError(f"gold id {gold} not among {len(scores)} candidates")
    gold_score = scores[gold]
    keep = np.ones(len(scores), dtype=bool)
    filtered = [k for k in known_true if k != gold]
    keep[filtered] = False
    survivors = scores[keep]
    greater = int((survivors > gold_score).sum())
    equal = int((survivors == gold_score).sum()) - 1  # exclude gold itself
    return 1 + greater + math.ceil(equal / 2)


def metrics_from_ranks(ranks) -> MetricsReport:
    ranks = np.asarray(ranks, dtype=float)
    if ranks.size == 0:
        raise ValueError("no ranks to aggregate")
    return MetricsReport(
        mr=float(ranks.mean()),
        mrr=float((1.0 / ranks).mean()),
        hits10=float((ranks <= 10).mean() * 100),
        hits3=float((ranks <= 3).mean() * 100),
        hits1=float((ranks <= 1).mean() * 100),
        n=int(ranks.size),
    )


def encode_all_entities(model: Model, n_entities: int,
                        batch_size: int = 512) -> torch.Tensor:
    """Candidate-side embedding cache, computed once per evaluation pass."""
    with torch.no_grad():
        chunks = [model.encode_entities(range(start, min(start + batch_size,
                                                         n_entities)))
                  for start in range(0, n_entities, batch_size)]
    return torch.cat(chunks)


def score_candidates(model: Model, s: int, r: int, candidates,
                     cache: torch.Tensor | None = None) -> np.ndarray:
    """Confidence scores for every candidate target of (s, r)."""
    candidates = list(candidates)
    if not candidates:
        raise ValueError("empty candidate list")
    with torch.no_grad():
        e_s = model.encode_entities([s])
        e_r = model.encode_relations([r])
        if cache is not None:
            cand = cache[torch.tensor(candidates)]
        else:
            cand = model.encode_entities(candidates)
        raw = model.score_candidates_raw(e_s, e_r, cand.unsqueeze(0))[0]
        if model.cfg.scorer == "tucker":
            raw = model.confidence(raw)
    return raw.numpy()


def evaluate(model: Model, ds: Dataset, split: str = "test",
             dump_ranks: bool = False):
    """Rank the gold target of every split tuple against all dataset entities.

    Returns (MetricsReport, [RankingResult] | None).
    """
    tuples = {"dev": ds.dev, "test": ds.test, "train": ds.train}.get(split)
    if tuples is None:
        raise ValueError(f"unknown split {split!r}")
    if not tuples:
        raise ValueError(f"split {split!r} is empty")
    workers = os.environ.get("TEXTKGE_EVAL_WORKERS")
    if workers:
        torch.set_num_threads(max(1, int(workers)))
    index = build_filter_index(ds)
    cache = encode_all_entities(model, ds.n_entities)
    n = ds.n_entities
    ranks, results = [], []
    for s, r, t in tuples:
        scores = score_candidates(model, s, r, range(n), cache=cache)
        rank = filtered_rank(scores, t, index.get((s, r), set()))
        ranks.append(rank)
        if dump_ranks:
            results.append(RankingResult((s, r, t), rank, n))
    return metrics_from_ranks(ranks), (results if dump_ranks else None)
