"""Shared toy knowledge graphs and small utilities for the test suite."""

from pathlib import Path

from textkge.data import RawTuple


def compositional_kg(n_subjects=20, n_mods=3, held_out_per_mod=4,
                     with_reverse=False):
    """A toy KG whose dev/test sources are unseen entities built entirely
    from training words.

    Sources are "s{i} m{j}" pairs, the gold target is "t{i}", so the target
    is recoverable from the source words alone. A few (i, j) combinations
    per modifier word are held out for dev/test; every subject and modifier
    word still occurs in training.
    """
    relation = "maps to"
    held_out = []
    for j in range(n_mods):
        for n in range(held_out_per_mod):
            # spread held-out combos so each subject loses at most one
            held_out.append(((j * held_out_per_mod + n) % n_subjects, j))
    held_set = set(held_out)
    train = [RawTuple(f"s{i} m{j}", relation, f"t{i}")
             for i in range(n_subjects) for j in range(n_mods)
             if (i, j) not in held_set]
    if with_reverse:
        # reverse edges spread trained targets over all entities, so a cold
        # baseline cannot benefit from a small cluster of popular targets
        train = train + [RawTuple(t.target, t.relation, t.source)
                         for t in train]
    eval_tuples = [RawTuple(f"s{i} m{j}", relation, f"t{i}")
                   for i, j in held_out]
    dev, test = eval_tuples[:held_out_per_mod], eval_tuples[held_out_per_mod:]
    return train, dev, test


def memorization_kg():
    """Ten tuples over a handful of entities, for memorization sanity checks."""
    rows = [
        ("go to zoo", "causes", "see animal"),
        ("read book", "causes", "learn thing"),
        ("eat food", "causes", "feel full"),
        ("run fast", "causes", "get tired"),
        ("play game", "causes", "have fun"),
        ("go to zoo", "requires", "buy ticket"),
        ("read book", "requires", "open book"),
        ("eat food", "requires", "cook meal"),
        ("run fast", "requires", "warm up"),
        ("play game", "requires", "find friend"),
    ]
    return [RawTuple(*row) for row in rows]


def write_dataset_dir(path, train, dev=(), test=()):
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    for name, tuples in (("train", train), ("dev", dev), ("test", test)):
        with open(path / f"{name}.tsv", "w", encoding="utf-8") as f:
            for t in tuples:
                f.write(f"{t.source}\t{t.relation}\t{t.target}\n")
    return path


def small_model(ds, encoder="cnn", scorer="tucker", seed=0, **overrides):
    from textkge.config import ModelConfig
    from textkge.model import Model
    kwargs = dict(encoder=encoder, scorer=scorer, d_w=6, d_e=6,
                  d_r=6 if scorer == "transe" else 5,
                  hidden_size=4, channels=3, filter_widths=(1, 2, 3))
    kwargs.update(overrides)
    cfg = ModelConfig(**kwargs)
    return Model(cfg, ds.vocab.n_words, ds.n_train_entities,
                 ds.n_train_relations, ds.entity_tokens, ds.relation_tokens,
                 seed=seed)
