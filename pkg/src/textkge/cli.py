"""Command-line entry point: dataset stats, training, evaluation, ad-hoc
ranking queries, and generated-output analysis."""

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import torch

from . import analysis, checkpoint, evaluation, plots
from .config import parse_config
from .data import compute_stats, load_dataset, normalize_text, word_coverage
from .model import Model
from .training import fit


def build_parser():
    parser = argparse.ArgumentParser(
        prog="textkge",
        description="Knowledge-graph link prediction with text-encoded "
                    "entity embeddings")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="dataset statistics report")
    p.add_argument("--data", required=True, help="directory with train/dev/test.tsv")
    p.add_argument("--format", default="src-first", choices=("src-first", "rel-first"))
    p.add_argument("--figures", help="directory for rendered figures")

    p = sub.add_parser("train", help="train a model from a config file")
    p.add_argument("--config", required=True, help="flat key=value config file")
    p.add_argument("--data", help="override the config's data directory")
    p.add_argument("--seed", type=int, help="override the config's seed")

    p = sub.add_parser("eval", help="evaluate a checkpoint on a split")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--format", default="src-first", choices=("src-first", "rel-first"))
    p.add_argument("--split", default="test", choices=("dev", "test", "train"))
    p.add_argument("--dump-ranks", help="write per-tuple ranks to this TSV file")
    p.add_argument("--figures", help="directory for rendered figures")

    p = sub.add_parser("rank", help="rank all entities for a source/relation query")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--source", required=True, help="source entity text")
    p.add_argument("--relation", required=True, help="relation text")
    p.add_argument("--k", type=int, default=10)

    p = sub.add_parser("analyze-generated",
                       help="training-set overlap of generated targets")
    p.add_argument("generated", help="TSV of source/relation/generated_target")
    p.add_argument("--data", required=True)
    p.add_argument("--format", default="src-first", choices=("src-first", "rel-first"))
    p.add_argument("--k", type=int, default=3,
                   help="nearest training entities listed per new target")
    p.add_argument("--no-lowercase", action="store_true",
                   help="compare raw strings instead of lowercased text")
    p.add_argument("--figures", help="directory for rendered figures")
    return parser


def cmd_stats(args) -> int:
    ds = load_dataset(args.data, args.format)
    stats = compute_stats(ds)
    report = json.loads(stats.to_json())
    if ds.test:
        report["word_coverage"] = word_coverage(ds)
    print(json.dumps(report, indent=2))
    if args.figures:
        plots.entity_length_histogram(
            [len(t) for t in ds.entity_tokens], args.figures)
    return 0


def cmd_train(args) -> int:
    cfg = parse_config(args.config)
    if args.data:
        cfg.data = args.data
    if args.seed is not None:
        cfg.train.seed = args.seed
    if not cfg.data:
        raise ValueError("no data directory: set 'data' in the config or pass --data")
    ds = load_dataset(cfg.data, cfg.format)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    model = Model(cfg.model, ds.vocab.n_words, ds.n_train_entities,
                  ds.n_train_relations, ds.entity_tokens, ds.relation_tokens,
                  seed=cfg.train.seed)

    dev_eval = None
    if cfg.train.dev_eval and ds.dev:
        def dev_eval(m):
            report, _ = evaluation.evaluate(m, ds, "dev")
            return report.mrr

    def epoch_hook(m, epoch, row):
        checkpoint.save_checkpoint(out / "last.ckpt", m, cfg, ds, epoch)

    model, history = fit(ds, model, cfg.train, dev_eval=dev_eval,
                         epoch_hook=epoch_hook)
    checkpoint.save_checkpoint(out / "model.ckpt", model, cfg, ds,
                               epoch=cfg.train.epochs)
    with open(out / "train_log.tsv", "w", encoding="utf-8") as f:
        cols = ["epoch", "train_loss"] + (["dev_mrr"] if dev_eval else [])
        f.write("\t".join(cols) + "\n")
        for row in history:
            f.write("\t".join(str(row[c]) for c in cols) + "\n")
    if history:
        plots.loss_curve(history, out)
    print(json.dumps({"checkpoint": str(out / "model.ckpt"),
                      "epochs": len(history),
                      "final_train_loss": history[-1]["train_loss"] if history else None},
                     indent=2))
    return 0


def cmd_eval(args) -> int:
    model, cfg, header = checkpoint.load_checkpoint(args.checkpoint)
    ds = load_dataset(args.data, args.format)
    checkpoint.check_vocab_match(header, ds, args.checkpoint)
    report, results = evaluation.evaluate(model, ds, args.split,
                                          dump_ranks=bool(args.dump_ranks))
    print(report.to_json())
    if args.dump_ranks:
        with open(args.dump_ranks, "w", encoding="utf-8") as f:
            f.write("source\trelation\ttarget\trank\tcandidates\n")
            for res in results:
                s, r, t = res.tuple
                f.write(f"{ds.entity_texts[s]}\t{ds.relation_texts[r]}\t"
                        f"{ds.entity_texts[t]}\t{res.rank}\t{res.candidate_count}\n")
    if args.figures:
        if results is None:
            _, results = evaluation.evaluate(model, ds, args.split, dump_ranks=True)
        plots.rank_histogram([res.rank for res in results], args.figures)
    return 0


def cmd_rank(args) -> int:
    if args.k < 1:
        raise ValueError("k must be >= 1")
    model, cfg, header = checkpoint.load_checkpoint(args.checkpoint)
    relations = {text: i for i, text in enumerate(header["relations"])}
    rel_key = normalize_text(args.relation)
    if rel_key not in relations:
        raise ValueError(
            f"unknown relation {args.relation!r}; known relations: "
            f"{', '.join(sorted(relations))}")
    entities = {text: i for i, text in enumerate(header["entities"])}
    src_key = normalize_text(args.source)
    word_ids = {w: i for i, w in enumerate(header["words"])}
    oov = len(word_ids)

    with torch.no_grad():
        if model.cfg.encoder == "lookup":
            src_id = entities.get(src_key, len(entities))
            if src_id >= header["n_train_entities"]:
                print("warning: source entity unseen in training; the lookup "
                      "encoder falls back to its untrained cold vector",
                      file=sys.stderr)
            e_s = model.encode_entities([src_id])
        else:
            tokens = [word_ids.get(w, oov) for w in src_key.split()]
            if not tokens:
                raise ValueError("source text is empty after normalization")
            e_s = model.encode_token_seqs([tokens], "entity")
        e_r = model.encode_relations([relations[rel_key]])
        cache = evaluation.encode_all_entities(model, len(header["entities"]))
        raw = model.score_candidates_raw(e_s, e_r, cache.unsqueeze(0))[0]
        if model.cfg.scorer == "tucker":
            raw = model.confidence(raw)
    scores = raw.numpy()
    order = np.lexsort((np.arange(len(scores)), -scores))[:args.k]
    print(json.dumps({
        "source": args.source, "relation": args.relation,
        "top": [{"rank": i + 1, "entity": header["entities"][idx],
                 "score": float(scores[idx])}
                for i, idx in enumerate(order)],
    }, indent=2))
    return 0


def cmd_analyze_generated(args) -> int:
    records = analysis.load_generated(args.generated)
    if not records:
        raise ValueError(f"{args.generated}: no generated records")
    ds = load_dataset(args.data, args.format)
    train_ids = {e for s, _, t in ds.train for e in (s, t)}
    training_entities = [ds.entity_texts[i] for i in sorted(train_ids)]
    lowercase = not args.no_lowercase
    report = analysis.membership_rate(records, training_entities, lowercase)
    train_set = {analysis._canon(e, lowercase) for e in training_entities}
    new_records = []
    for rec in records:
        if analysis._canon(rec.generated_target, lowercase) not in train_set:
            neighbors = analysis.nearest_training_entities(
                rec, training_entities, args.k)
            new_records.append({
                "source": rec.source, "relation": rec.relation,
                "generated_target": rec.generated_target,
                "nearest_training_entities": [
                    {"entity": e, "similarity": sim} for e, sim in neighbors],
            })
    out = json.loads(report.to_json())
    out["new_targets"] = new_records
    print(json.dumps(out, indent=2))
    if args.figures:
        plots.overlap_bars(report, args.figures)
    return 0


COMMANDS = {
    "stats": cmd_stats,
    "train": cmd_train,
    "eval": cmd_eval,
    "rank": cmd_rank,
    "analyze-generated": cmd_analyze_generated,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except Exception as exc:  # reports to stdout, errors to stderr
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
