"""Training loop: sampled/full BCE and margin objectives, negative sampling,
and a finite-difference gradient checker."""

import logging

import numpy as np
import torch

from .config import TrainConfig
from .data import Dataset
from .model import Model

log = logging.getLogger(__name__)


def bce_loss(p: torch.Tensor, y: torch.Tensor, clamp: float = 1e-7) -> torch.Tensor:
    """Mean binary cross-entropy over the candidate axis (the last one).

    Probabilities are clamped to [clamp, 1 - clamp] before the logs.
    """
    if p.shape != y.shape:
        raise ValueError("probability/label shape mismatch")
    p = p.clamp(clamp, 1 - clamp)
    return -(y * torch.log(p) + (1 - y) * torch.log(1 - p)).mean(dim=-1)


def sample_negative(gold_target: int, n_entities: int, rng: np.random.Generator) -> int:
    """Uniform draw over training entity ids excluding the gold target."""
    if n_entities < 2:
        raise ValueError("need at least 2 entities to sample a negative")
    while True:
        cand = int(rng.integers(n_entities))
        if cand != gold_target:
            return cand


def _probabilities(model: Model, raw: torch.Tensor) -> torch.Tensor:
    # translation scores are squashed into (0, 1) for the BCE objectives
    return torch.sigmoid(raw)


def training_step(positives, model: Model, cfg: TrainConfig,
                  rng: np.random.Generator, optimizer=None) -> float:
    """One forward/backward/update on a batch of positive id triples.

    Returns the batch loss. ``optimizer`` of None skips the update (used by
    the gradient checker, which only wants the backward pass).
    """
    loss = batch_loss(positives, model, cfg, rng)
    if not torch.isfinite(loss):
        raise RuntimeError(
            f"non-finite loss {loss.item()} on batch of {len(positives)} "
            f"tuples (first: {positives[0]})")
    if optimizer is not None:
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
    return float(loss.detach())


def batch_loss(positives, model: Model, cfg: TrainConfig,
               rng: np.random.Generator) -> torch.Tensor:
    n_train = model.n_train_entities
    if cfg.objective == "sampled-bce":
        negatives = [(s, r, sample_negative(t, n_train, rng))
                     for s, r, t in positives]
        raw_pos = model.score_raw(*model.encode_tuples(positives))
        raw_neg = model.score_raw(*model.encode_tuples(negatives))
        p = torch.stack([_probabilities(model, raw_pos),
                         _probabilities(model, raw_neg)], dim=1)  # (B, 2)
        y = torch.zeros_like(p)
        y[:, 0] = 1.0
        return bce_loss(p, y, cfg.clamp).mean()
    if cfg.objective == "full-bce":
        if n_train > cfg.max_full_bce_entities:
            raise MemoryError(
                f"full-bce scores all {n_train} training entities per step; "
                f"this exceeds the configured budget of "
                f"{cfg.max_full_bce_entities} entities -- use the sampled "
                f"objective instead")
        e_s, e_r, _ = model.encode_tuples(positives)
        cand = model.encode_entities(range(n_train))
        raw = model.score_candidates_raw(
            e_s, e_r, cand.unsqueeze(0).expand(len(positives), -1, -1))
        p = _probabilities(model, raw)  # (B, n_train)
        y = torch.zeros_like(p)
        for i, (_, _, t) in enumerate(positives):
            y[i, t] = 1.0
        return bce_loss(p, y, cfg.clamp).mean()
    # margin: hinge on the positive/negative distance gap
    negatives = [(s, r, sample_negative(t, n_train, rng))
                 for s, r, t in positives]
    d_pos = -model.score_raw(*model.encode_tuples(positives))
    d_neg = -model.score_raw(*model.encode_tuples(negatives))
    return torch.relu(cfg.margin + d_pos - d_neg).mean()


def make_optimizer(model: Model, cfg: TrainConfig):
    if cfg.optimizer == "adam":
        return torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    return torch.optim.SGD(model.parameters(), lr=cfg.learning_rate)


def fit(ds: Dataset, model: Model, cfg: TrainConfig, dev_eval=None,
        epoch_hook=None):
    """Train over shuffled mini-batches; returns (model, history).

    ``dev_eval`` is an optional callable(model) -> MRR; when given, the
    parameters of the best-dev epoch are restored before returning.
    History rows carry epoch, mean train loss, and dev MRR when evaluated.
    """
    cfg.validate()
    torch.set_num_threads(1)  # determinism contract for seeded runs
    ss = np.random.SeedSequence(cfg.seed)
    shuffle_rng, neg_rng = (np.random.default_rng(s) for s in ss.spawn(2))
    optimizer = make_optimizer(model, cfg)
    history = []
    best_mrr, best_state = -1.0, None
    tuples = list(ds.train)
    for epoch in range(cfg.epochs):
        order = shuffle_rng.permutation(len(tuples))
        losses = []
        for start in range(0, len(tuples), cfg.batch_size):
            batch = [tuples[i] for i in order[start:start + cfg.batch_size]]
            losses.append(training_step(batch, model, cfg, neg_rng, optimizer))
        row = {"epoch": epoch, "train_loss": float(np.mean(losses))}
        if dev_eval is not None:
            with torch.no_grad():
                row["dev_mrr"] = float(dev_eval(model))
            if row["dev_mrr"] > best_mrr:
                best_mrr = row["dev_mrr"]
                best_state = {k: v.detach().clone()
                              for k, v in model.state_dict().items()}
        history.append(row)
        log.info("epoch %d: %s", epoch, row)
        if epoch_hook is not None:
            epoch_hook(model, epoch, row)
    if best_state is not None:
        model.load_state_dict(best_state)
    return model, history


def gradient_check(model: Model, batch, cfg: TrainConfig,
                   step: float = 1e-4, neg_seed: int = 0) -> dict[str, float]:
    """Compare analytic gradients of the batch loss against central finite
    differences for every parameter tensor; returns per-tensor max relative
    error. The negative-sample stream is replayed identically for every
    forward pass."""
    def loss_value():
        return batch_loss(batch, model, cfg, np.random.default_rng(neg_seed))

    model.zero_grad()
    loss = loss_value()
    loss.backward()
    report = {}
    for name, param in model.named_parameters():
        analytic = (param.grad if param.grad is not None
                    else torch.zeros_like(param))
        flat = param.data.view(-1)
        worst = 0.0
        for i in range(flat.numel()):
            orig = flat[i].item()
            flat[i] = orig + step
            up = loss_value().item()
            flat[i] = orig - step
            down = loss_value().item()
            flat[i] = orig
            fd = (up - down) / (2 * step)
            a = analytic.view(-1)[i].item()
            denom = max(abs(a) + abs(fd), 1e-6)
            worst = max(worst, abs(a - fd) / denom)
        report[name] = worst
    return report
