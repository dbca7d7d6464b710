"""Versioned binary checkpoints: JSON header + named raw tensor blocks.

The header carries the run config, the vocabulary (with entity/relation token
sequences, so a checkpoint can score novel text on its own), the training
seed/epoch, and a vocabulary hash used to reject mismatched datasets before
any scoring. The byte layout is fully deterministic.
"""

import hashlib
import json
import struct

import numpy as np
import torch

from .config import RunConfig, config_from_dict, config_to_dict
from .data import Dataset
from .model import Model

MAGIC = b"TKGECKPT"
VERSION = 1


def vocab_hash(ds_or_header) -> str:
    if isinstance(ds_or_header, Dataset):
        payload = {
            "words": sorted(ds_or_header.vocab.words, key=ds_or_header.vocab.words.get),
            "entities": ds_or_header.entity_texts,
            "relations": ds_or_header.relation_texts,
        }
    else:
        payload = {
            "words": ds_or_header["words"],
            "entities": ds_or_header["entities"],
            "relations": ds_or_header["relations"],
        }
    blob = json.dumps(payload, ensure_ascii=False, sort_keys=True)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def save_checkpoint(path, model: Model, cfg: RunConfig, ds: Dataset,
                    epoch: int) -> None:
    state = model.state_dict()
    manifest = []
    blocks = []
    for name in sorted(state):
        arr = state[name].detach().numpy()
        manifest.append({"name": name, "dtype": str(arr.dtype),
                         "shape": list(arr.shape)})
        blocks.append(np.ascontiguousarray(arr).tobytes())
    header = {
        "version": VERSION,
        "config": config_to_dict(cfg),
        "epoch": epoch,
        "vocab_hash": vocab_hash(ds),
        "words": sorted(ds.vocab.words, key=ds.vocab.words.get),
        "entities": ds.entity_texts,
        "relations": ds.relation_texts,
        "entity_tokens": ds.entity_tokens,
        "relation_tokens": ds.relation_tokens,
        "n_train_entities": ds.n_train_entities,
        "n_train_relations": ds.n_train_relations,
        "tensors": manifest,
    }
    header_bytes = json.dumps(header, ensure_ascii=False,
                              sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", VERSION))
        f.write(struct.pack("<Q", len(header_bytes)))
        f.write(header_bytes)
        for block in blocks:
            f.write(block)


def load_checkpoint(path):
    """Returns (model, run_config, header)."""
    with open(path, "rb") as f:
        if f.read(len(MAGIC)) != MAGIC:
            raise ValueError(f"{path}: not a checkpoint file")
        (version,) = struct.unpack("<I", f.read(4))
        if version != VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {version}")
        (hlen,) = struct.unpack("<Q", f.read(8))
        header = json.loads(f.read(hlen).decode("utf-8"))
        cfg = config_from_dict(header["config"])
        model = Model(cfg.model,
                      n_words=len(header["words"]) + 1,
                      n_train_entities=header["n_train_entities"],
                      n_train_relations=header["n_train_relations"],
                      entity_tokens=header["entity_tokens"],
                      relation_tokens=header["relation_tokens"],
                      seed=cfg.train.seed)
        state = {}
        for spec in header["tensors"]:
            count = int(np.prod(spec["shape"])) if spec["shape"] else 1
            arr = np.frombuffer(
                f.read(count * np.dtype(spec["dtype"]).itemsize),
                dtype=spec["dtype"]).reshape(spec["shape"])
            state[spec["name"]] = torch.from_numpy(arr.copy())
    model.load_state_dict(state)
    return model, cfg, header


def check_vocab_match(header: dict, ds: Dataset, path="checkpoint") -> None:
    got = vocab_hash(ds)
    want = header["vocab_hash"]
    if got != want:
        raise ValueError(
            f"vocabulary mismatch: {path} was trained with vocabulary hash "
            f"{want} but the data directory hashes to {got}")
