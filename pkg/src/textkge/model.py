"""Entity/relation encoders and tuple scorers.

A :class:`Model` bundles a word-embedding table, one encoder (lookup table,
text CNN, or BiLSTM) with separate entity/relation projection heads, and one
scorer (translation distance or trilinear core tensor). All confidence scores
are oriented higher = more plausible.
"""

import math

import torch
import torch.nn as nn
import torch.nn.functional as F

from . import scoring
from .config import ModelConfig

INIT_SCALE = 0.1


def _uniform(shape, generator, dtype, scale=INIT_SCALE):
    return (torch.rand(*shape, generator=generator, dtype=dtype) * 2 - 1) * scale


def _fan_in(shape, fan_in, generator, dtype):
    # weights drawn at +-1/sqrt(fan_in) so encoder outputs keep unit-ish
    # variance and do not collapse onto the projection bias
    return _uniform(shape, generator, dtype, scale=1.0 / math.sqrt(fan_in))


def rowwise_linear(x, weight, bias=None):
    """x @ weight.T + bias via broadcast multiply and last-dim sum.

    BLAS picks different kernels for different batch sizes, which changes
    low-order bits; this keeps every row's reduction identical regardless of
    how many rows are in the batch, so batched and single encodings agree
    bit for bit.
    """
    out = (x.unsqueeze(-2) * weight).sum(-1)
    return out if bias is None else out + bias


class CnnEncoder(nn.Module):
    """1-D convolutions over time with ReLU and max-over-time pooling.

    Each sequence is zero-padded at its end to at least the largest filter
    width, so outputs do not depend on how other sequences in the batch are
    padded.
    """

    def __init__(self, d_w, widths, channels, generator, dtype):
        super().__init__()
        self.widths = tuple(widths)
        self.channels = channels
        self.filters = nn.ParameterList(
            nn.Parameter(_fan_in((channels, d_w, w), d_w * w, generator, dtype))
            for w in self.widths)
        self.biases = nn.ParameterList(
            nn.Parameter(_fan_in((channels,), d_w * w, generator, dtype))
            for w in self.widths)

    @property
    def out_features(self):
        return self.channels * len(self.widths)

    def forward(self, seq, lengths):
        # seq: (B, L, d_w) zero-padded; lengths: (B,)
        wmax = max(self.widths)
        if seq.shape[1] < wmax:
            seq = F.pad(seq, (0, 0, 0, wmax - seq.shape[1]))
        padded_len = lengths.clamp(min=wmax)
        pooled = []
        for w, weight, bias in zip(self.widths, self.filters, self.biases):
            # (B, n_pos, d_w * w) sliding windows against (C, d_w * w) filters
            windows = seq.unfold(1, w, 1).reshape(seq.shape[0], -1,
                                                  seq.shape[2] * w)
            flat = weight.reshape(self.channels, -1)
            conv = F.relu(rowwise_linear(windows, flat, bias))  # (B, n_pos, C)
            pos = torch.arange(conv.shape[1])
            # valid window starts per sequence: [0, padded_len - w]
            mask = pos.unsqueeze(0) > (padded_len - w).unsqueeze(1)
            conv = conv.masked_fill(mask.unsqueeze(2), float("-inf"))
            pooled.append(conv.max(dim=1).values)
        return torch.cat(pooled, dim=1)


class BiLstmEncoder(nn.Module):
    """Bidirectional LSTM; concatenates the final hidden states of the two
    directions. Recurrence is unrolled manually so each sequence's final
    state is read at its own length."""

    def __init__(self, d_w, hidden_size, generator, dtype):
        super().__init__()
        self.hidden_size = hidden_size
        h = hidden_size
        self.w_ih_f = nn.Parameter(_fan_in((4 * h, d_w), d_w, generator, dtype))
        self.w_hh_f = nn.Parameter(_fan_in((4 * h, h), h, generator, dtype))
        self.b_f = nn.Parameter(_fan_in((4 * h,), h, generator, dtype))
        self.w_ih_b = nn.Parameter(_fan_in((4 * h, d_w), d_w, generator, dtype))
        self.w_hh_b = nn.Parameter(_fan_in((4 * h, h), h, generator, dtype))
        self.b_b = nn.Parameter(_fan_in((4 * h,), h, generator, dtype))

    @property
    def out_features(self):
        return 2 * self.hidden_size

    def _run(self, seq, lengths, w_ih, w_hh, b):
        batch, L, _ = seq.shape
        h = seq.new_zeros(batch, self.hidden_size)
        c = seq.new_zeros(batch, self.hidden_size)
        final = seq.new_zeros(batch, self.hidden_size)
        for t in range(L):
            gates = rowwise_linear(seq[:, t], w_ih, b) + rowwise_linear(h, w_hh)
            i, f, g, o = gates.chunk(4, dim=1)
            c = torch.sigmoid(f) * c + torch.sigmoid(i) * torch.tanh(g)
            h = torch.sigmoid(o) * torch.tanh(c)
            final = torch.where((lengths == t + 1).unsqueeze(1), h, final)
        return final

    def forward(self, seq, lengths):
        fwd = self._run(seq, lengths, self.w_ih_f, self.w_hh_f, self.b_f)
        # reverse each sequence within its own length
        pos = torch.arange(seq.shape[1]).unsqueeze(0)
        rev_idx = (lengths.unsqueeze(1) - 1 - pos).clamp(min=0)
        rev = seq.gather(1, rev_idx.unsqueeze(2).expand_as(seq))
        bwd = self._run(rev, lengths, self.w_ih_b, self.w_hh_b, self.b_b)
        return torch.cat([fwd, bwd], dim=1)


class Model(nn.Module):
    def __init__(self, cfg: ModelConfig, n_words: int, n_train_entities: int,
                 n_train_relations: int, entity_tokens: list[list[int]],
                 relation_tokens: list[list[int]], seed: int = 0,
                 dtype=torch.float32):
        super().__init__()
        cfg.validate()
        self.cfg = cfg
        self.n_words = n_words
        self.n_train_entities = n_train_entities
        self.n_train_relations = n_train_relations
        self.set_token_tables(entity_tokens, relation_tokens)

        gen = torch.Generator().manual_seed(seed)
        if cfg.encoder == "lookup":
            self.entity_table = nn.Parameter(
                _uniform((n_train_entities, cfg.d_e), gen, dtype))
            self.relation_table = nn.Parameter(
                _uniform((n_train_relations, cfg.d_r), gen, dtype))
            # untrained embeddings returned for unseen ids; never updated
            self.register_buffer("cold_entity", _uniform((cfg.d_e,), gen, dtype))
            self.register_buffer("cold_relation", _uniform((cfg.d_r,), gen, dtype))
        else:
            self.word_emb = nn.Parameter(_uniform((n_words, cfg.d_w), gen, dtype))
            if cfg.encoder == "cnn":
                self.encoder = CnnEncoder(cfg.d_w, cfg.filter_widths,
                                          cfg.channels, gen, dtype)
            else:
                self.encoder = BiLstmEncoder(cfg.d_w, cfg.hidden_size, gen, dtype)
            feat = self.encoder.out_features
            self.proj_e = nn.Parameter(_fan_in((cfg.d_e, feat), feat, gen, dtype))
            self.proj_e_bias = nn.Parameter(_fan_in((cfg.d_e,), feat, gen, dtype))
            self.proj_r = nn.Parameter(_fan_in((cfg.d_r, feat), feat, gen, dtype))
            self.proj_r_bias = nn.Parameter(_fan_in((cfg.d_r,), feat, gen, dtype))

        if cfg.scorer == "tucker":
            self.core = nn.Parameter(_fan_in((cfg.d_e, cfg.d_r, cfg.d_e),
                                             cfg.d_e * cfg.d_r, gen, dtype))

    def set_token_tables(self, entity_tokens, relation_tokens):
        """Attach the id -> word-id sequences the text encoders read from."""
        self.entity_tokens = [list(t) for t in entity_tokens]
        self.relation_tokens = [list(t) for t in relation_tokens]

    # ---- encoding ----

    def _pad_tokens(self, token_seqs):
        lengths = torch.tensor([len(t) for t in token_seqs], dtype=torch.long)
        if (lengths < 1).any():
            raise ValueError("cannot encode an empty token sequence")
        L = int(lengths.max())
        padded = torch.zeros(len(token_seqs), L, dtype=torch.long)
        for i, toks in enumerate(token_seqs):
            if max(toks) >= self.n_words:
                raise IndexError(f"word id {max(toks)} out of range")
            padded[i, :len(toks)] = torch.tensor(toks, dtype=torch.long)
        return padded, lengths

    def embed_tokens(self, padded, lengths):
        """Word-embedding lookup with padding rows zeroed."""
        seq = self.word_emb[padded]
        mask = torch.arange(padded.shape[1]).unsqueeze(0) < lengths.unsqueeze(1)
        return seq * mask.unsqueeze(2).to(seq.dtype)

    def encode_token_seqs(self, token_seqs, head: str):
        padded, lengths = self._pad_tokens(token_seqs)
        feats = self.encoder(self.embed_tokens(padded, lengths), lengths)
        if head == "entity":
            return rowwise_linear(feats, self.proj_e, self.proj_e_bias)
        return rowwise_linear(feats, self.proj_r, self.proj_r_bias)

    def encode_entities(self, ids) -> torch.Tensor:
        """(B,) entity ids -> (B, d_e) embeddings."""
        ids = list(ids)
        if self.cfg.encoder == "lookup":
            rows = [self.entity_table[i] if i < self.n_train_entities
                    else self.cold_entity for i in ids]
            return torch.stack(rows)
        return self.encode_token_seqs([self.entity_tokens[i] for i in ids], "entity")

    def encode_relations(self, ids) -> torch.Tensor:
        ids = list(ids)
        if self.cfg.encoder == "lookup":
            rows = [self.relation_table[i] if i < self.n_train_relations
                    else self.cold_relation for i in ids]
            return torch.stack(rows)
        return self.encode_token_seqs([self.relation_tokens[i] for i in ids],
                                      "relation")

    def encode_tuples(self, tuples):
        """Batch of (s, r, t) id triples -> (e_s, e_r, e_t) stacks."""
        s, r, t = zip(*tuples)
        return self.encode_entities(s), self.encode_relations(r), self.encode_entities(t)

    # ---- scoring ----

    def score_raw(self, e_s, e_r, e_t) -> torch.Tensor:
        """Pre-sigmoid confidence; for the translation scorer this is the
        negated distance itself."""
        if self.cfg.scorer == "transe":
            return scoring.score_transe(e_s, e_r, e_t, self.cfg.transe_norm)
        return scoring.tucker_raw(e_s, e_r, e_t, self.core)

    def score_candidates_raw(self, e_s, e_r, cand: torch.Tensor) -> torch.Tensor:
        """Score (B, d) source/relation pairs against (B, n, d) candidates."""
        return scoring.score_candidates_raw(
            e_s, e_r, cand, self.cfg.scorer,
            core=getattr(self, "core", None), norm=self.cfg.transe_norm)

    def confidence(self, raw: torch.Tensor) -> torch.Tensor:
        """Map a raw score to a probability; the trilinear scorer is defined
        with a sigmoid output, the translation scorer is squashed the same
        way when a probability is needed."""
        return torch.sigmoid(raw)

    def score_tuples(self, tuples) -> torch.Tensor:
        e_s, e_r, e_t = self.encode_tuples(tuples)
        raw = self.score_raw(e_s, e_r, e_t)
        return self.confidence(raw) if self.cfg.scorer == "tucker" else raw


def embed_sequence(tokens, table: torch.Tensor) -> torch.Tensor:
    """Look up rows for a single token sequence; (L,) ids -> (L, d_w)."""
    if len(tokens) == 0:
        raise ValueError("empty token sequence")
    idx = torch.tensor(list(tokens), dtype=torch.long)
    if idx.min() < 0 or idx.max() >= table.shape[0]:
        raise IndexError("word id out of range")
    return table[idx]


def uniform_random_mrr(n_candidates: int) -> float:
    """Expected MRR of a uniformly random ranker over n candidates."""
    return sum(1.0 / k for k in range(1, n_candidates + 1)) / n_candidates


def count_parameters(model: Model) -> int:
    return sum(p.numel() for p in model.parameters())
