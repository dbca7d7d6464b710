"""Tuple file loading, vocabulary construction and dataset statistics."""

import json
from dataclasses import dataclass, field
from pathlib import Path

FORMATS = ("src-first", "rel-first")


class TupleFormatError(ValueError):
    """A line in a tuple file does not match the declared format."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


@dataclass(frozen=True)
class RawTuple:
    source: str
    relation: str
    target: str


def normalize_text(raw: str) -> str:
    """Lowercase, trim, and collapse internal whitespace runs to single spaces."""
    return " ".join(raw.split()).lower()


def load_tuples(path, fmt: str = "src-first") -> list[RawTuple]:
    """Read one tuple per non-empty line from a TSV file.

    ``src-first`` lines are ``source \\t relation \\t target``; ``rel-first``
    lines are ``relation \\t source \\t target`` with an optional trailing
    score column, which is ignored.
    """
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}, expected one of {FORMATS}")
    tuples = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            cols = [c.strip() for c in line.rstrip("\n").split("\t")]
            if fmt == "src-first":
                if len(cols) != 3:
                    raise TupleFormatError(path, line_no,
                                           f"expected 3 columns, got {len(cols)}")
                src, rel, tgt = cols
            else:
                if len(cols) not in (3, 4):
                    raise TupleFormatError(path, line_no,
                                           f"expected 3 or 4 columns, got {len(cols)}")
                rel, src, tgt = cols[:3]
            if not (src and rel and tgt):
                raise TupleFormatError(path, line_no, "empty field")
            tuples.append(RawTuple(src, rel, tgt))
    return tuples


@dataclass
class Vocabulary:
    """Word/entity/relation maps built from the training split only.

    Ids are dense, 0-based, first-seen order; keys are normalized text.
    ``oov_word_id`` is a dedicated id after all real words.
    """
    words: dict[str, int] = field(default_factory=dict)
    entities: dict[str, int] = field(default_factory=dict)
    relations: dict[str, int] = field(default_factory=dict)
    oov_word_id: int = 0

    @property
    def n_words(self):
        # includes the OOV slot
        return len(self.words) + 1

    def word_id(self, word: str) -> int:
        return self.words.get(word, self.oov_word_id)


@dataclass
class Dataset:
    train: list[tuple[int, int, int]]
    dev: list[tuple[int, int, int]]
    test: list[tuple[int, int, int]]
    vocab: Vocabulary
    entity_texts: list[str]
    relation_texts: list[str]
    entity_tokens: list[list[int]]
    relation_tokens: list[list[int]]
    n_train_entities: int
    n_train_relations: int

    @property
    def n_entities(self):
        return len(self.entity_texts)

    @property
    def n_relations(self):
        return len(self.relation_texts)

    def is_unseen_entity(self, eid: int) -> bool:
        return eid >= self.n_train_entities


def _tokenize(text: str, vocab: Vocabulary) -> list[int]:
    return [vocab.word_id(w) for w in normalize_text(text).split()]


def build_dataset(train: list[RawTuple], dev=(), test=()) -> Dataset:
    """Assign ids from the training split; dev/test-only entities get fresh ids.

    Unknown dev/test words map to the OOV id. Entity and relation texts are
    normalized before id assignment.
    """
    if not train:
        raise ValueError("training split is empty")
    vocab = Vocabulary()
    for t in train:
        for text in (t.source, t.relation, t.target):
            for w in normalize_text(text).split():
                vocab.words.setdefault(w, len(vocab.words))
        for text in (t.source, t.target):
            vocab.entities.setdefault(normalize_text(text), len(vocab.entities))
        vocab.relations.setdefault(normalize_text(t.relation), len(vocab.relations))
    vocab.oov_word_id = len(vocab.words)

    entities = dict(vocab.entities)
    relations = dict(vocab.relations)

    def entity_id(text):
        key = normalize_text(text)
        if key not in entities:
            entities[key] = len(entities)
        return entities[key]

    def relation_id(text):
        key = normalize_text(text)
        if key not in relations:
            relations[key] = len(relations)
        return relations[key]

    def to_ids(tuples):
        return [(entity_id(t.source), relation_id(t.relation), entity_id(t.target))
                for t in tuples]

    train_ids = to_ids(train)
    dev_ids = to_ids(dev)
    test_ids = to_ids(test)

    entity_texts = sorted(entities, key=entities.get)
    relation_texts = sorted(relations, key=relations.get)
    ds = Dataset(
        train=train_ids, dev=dev_ids, test=test_ids, vocab=vocab,
        entity_texts=entity_texts, relation_texts=relation_texts,
        entity_tokens=[_tokenize(t, vocab) for t in entity_texts],
        relation_tokens=[_tokenize(t, vocab) for t in relation_texts],
        n_train_entities=len(vocab.entities),
        n_train_relations=len(vocab.relations),
    )
    assert all(ds.entity_tokens), "every entity must tokenize to >= 1 word"
    return ds


def load_dataset(data_dir, fmt: str = "src-first") -> Dataset:
    """Load train/dev/test TSV files from a directory."""
    data_dir = Path(data_dir)
    splits = {}
    for name in ("train", "dev", "test"):
        path = data_dir / f"{name}.tsv"
        if name == "train" and not path.exists():
            raise FileNotFoundError(f"missing training file: {path}")
        splits[name] = load_tuples(path, fmt) if path.exists() else []
    return build_dataset(splits["train"], splits["dev"], splits["test"])


@dataclass
class DatasetStats:
    tuple_counts: tuple[int, int, int]
    entity_count: int
    relation_count: int
    word_count: int
    avg_entity_length: float
    unseen_tuple_proportion: float

    def to_json(self) -> str:
        return json.dumps({
            "tuple_counts": {"train": self.tuple_counts[0],
                             "dev": self.tuple_counts[1],
                             "test": self.tuple_counts[2]},
            "entity_count": self.entity_count,
            "relation_count": self.relation_count,
            "word_count": self.word_count,
            "avg_entity_length": self.avg_entity_length,
            "unseen_tuple_proportion": self.unseen_tuple_proportion,
        }, indent=2)


def compute_stats(ds: Dataset) -> DatasetStats:
    """Dataset statistics; unseen proportion counts test tuples whose source
    entity text never occurs as a training entity."""
    if ds.test:
        unseen = sum(1 for s, _, _ in ds.test if ds.is_unseen_entity(s))
        unseen_prop = unseen / len(ds.test)
    else:
        unseen_prop = 0.0
    lengths = [len(toks) for toks in ds.entity_tokens]
    return DatasetStats(
        tuple_counts=(len(ds.train), len(ds.dev), len(ds.test)),
        entity_count=ds.n_entities,
        relation_count=ds.n_relations,
        word_count=len(ds.vocab.words),
        avg_entity_length=sum(lengths) / len(lengths),
        unseen_tuple_proportion=unseen_prop,
    )


def word_coverage(ds: Dataset) -> float:
    """Fraction of word types in test entity texts that also occur in
    training entity texts."""
    if not ds.test:
        raise ValueError("test split is empty")
    train_entity_ids = {e for s, _, t in ds.train for e in (s, t)}
    test_entity_ids = {e for s, _, t in ds.test for e in (s, t)}
    train_words = {w for e in train_entity_ids
                   for w in normalize_text(ds.entity_texts[e]).split()}
    test_words = {w for e in test_entity_ids
                  for w in normalize_text(ds.entity_texts[e]).split()}
    return len(test_words & train_words) / len(test_words)
