"""Audit of generated tuples: training-set membership of generated targets
and nearest-training-entity retrieval for the ones that are new."""

import json
from dataclasses import dataclass

from .data import TupleFormatError, normalize_text


@dataclass(frozen=True)
class GeneratedRecord:
    source: str
    relation: str
    generated_target: str


def load_generated(path) -> list[GeneratedRecord]:
    """TSV ``source \\t relation \\t generated_target``, one record per line."""
    records = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            cols = [c.strip() for c in line.rstrip("\n").split("\t")]
            if len(cols) != 3 or not all(cols):
                raise TupleFormatError(path, line_no,
                                       "expected 3 non-empty columns")
            records.append(GeneratedRecord(*cols))
    return records


@dataclass
class OverlapReport:
    total: int
    in_training: int
    not_in_training: int
    # same counts after deduplicating generated targets
    dedup_total: int
    dedup_in_training: int

    @property
    def in_proportion(self):
        return self.in_training / self.total

    @property
    def not_in_proportion(self):
        return self.not_in_training / self.total

    def to_json(self) -> str:
        return json.dumps({
            "total": self.total,
            "in_training": self.in_training,
            "not_in_training": self.not_in_training,
            "in_proportion": self.in_proportion,
            "not_in_proportion": self.not_in_proportion,
            "dedup_total": self.dedup_total,
            "dedup_in_training": self.dedup_in_training,
        }, indent=2)


def _canon(text: str, lowercase: bool) -> str:
    return normalize_text(text) if lowercase else " ".join(text.split())


def membership_rate(records, training_entities, lowercase: bool = True) -> OverlapReport:
    """Count generated targets whose (normalized) text is exactly a training
    entity. ``lowercase=False`` reproduces the raw character-level comparison
    that treats differently-cased duplicates as new."""
    if not records:
        raise ValueError("no generated records")
    train = {_canon(e, lowercase) for e in training_entities}
    targets = [_canon(rec.generated_target, lowercase) for rec in records]
    in_training = sum(1 for t in targets if t in train)
    dedup = set(targets)
    return OverlapReport(
        total=len(targets),
        in_training=in_training,
        not_in_training=len(targets) - in_training,
        dedup_total=len(dedup),
        dedup_in_training=sum(1 for t in dedup if t in train),
    )


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1,
                           prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def similarity(a: str, b: str) -> float:
    """max(token Jaccard, 1 - normalized edit distance) over normalized texts;
    symmetric, in [0, 1], and 1.0 exactly on equal normalized texts."""
    a, b = normalize_text(a), normalize_text(b)
    if a == b:
        return 1.0
    ta, tb = set(a.split()), set(b.split())
    jaccard = len(ta & tb) / len(ta | tb) if (ta | tb) else 1.0
    edit = 1.0 - levenshtein(a, b) / max(len(a), len(b), 1)
    return max(jaccard, edit)


def nearest_training_entities(record: GeneratedRecord, training_entities,
                              k: int = 5) -> list[tuple[str, float]]:
    """Top-k most similar training entities to the generated target,
    descending similarity, ties broken by entity text. Surfaces candidates
    for human judgment; makes no similar/better verdict itself."""
    if k < 1:
        raise ValueError("k must be >= 1")
    training_entities = list(training_entities)
    if not training_entities:
        raise ValueError("empty training entity set")
    scored = [(e, similarity(record.generated_target, e))
              for e in training_entities]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:k]
