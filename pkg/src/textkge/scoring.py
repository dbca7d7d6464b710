"""Tuple confidence scorers: translation distance and trilinear core tensor.

Both are oriented so that higher means more plausible. The trilinear scorer
outputs a sigmoid probability; the translation scorer exposes the raw negated
distance and is squashed by the caller when a probability is needed.
"""

import torch


def _neg_norm(diff: torch.Tensor, norm: str) -> torch.Tensor:
    # spelled out (not vector_norm) so batched and single paths reduce the
    # last dim through the exact same kernel and stay bit-identical
    if norm == "l1":
        return -diff.abs().sum(-1)
    return -torch.sqrt((diff * diff).sum(-1))


def score_transe(e_s, e_r, e_t, norm: str = "l2") -> torch.Tensor:
    """Negated ||e_s + e_r - e_t|| under L1 or L2. Always <= 0; zero exactly
    when the target equals source + relation."""
    if e_s.shape[-1] != e_r.shape[-1] or e_s.shape[-1] != e_t.shape[-1]:
        raise ValueError("embedding dimension mismatch")
    return _neg_norm((e_s + e_r) - e_t, norm)


def tucker_raw(e_s, w_r, e_t, core) -> torch.Tensor:
    """Trilinear form sum_ijk core[i,j,k] * e_s[i] * w_r[j] * e_t[k]."""
    d_e, d_r, _ = core.shape
    if e_s.shape[-1] != d_e or w_r.shape[-1] != d_r or e_t.shape[-1] != d_e:
        raise ValueError("embedding dimensions do not match the core tensor")
    squeeze = e_s.dim() == 1
    if squeeze:
        e_s, w_r, e_t = e_s.unsqueeze(0), w_r.unsqueeze(0), e_t.unsqueeze(0)
    v = _relation_map(core, e_s, w_r)
    out = (v * e_t).sum(-1)
    return out.squeeze(0) if squeeze else out


def _relation_map(core, e_s, w_r) -> torch.Tensor:
    """(B, d_e) source x (B, d_r) relation -> (B, d_e) target-side vector.

    Written as broadcast multiplies with fixed-axis sums (no einsum/BLAS) so
    the reduction order does not depend on the batch size.
    """
    # (B, d_r, d_e) <- contract the source axis, then the relation axis
    sw = (core.unsqueeze(0) * e_s[:, :, None, None]).sum(1)
    return (sw * w_r[:, :, None]).sum(1)


def score_tucker(e_s, w_r, e_t, core) -> torch.Tensor:
    return torch.sigmoid(tucker_raw(e_s, w_r, e_t, core))


def score_candidates_raw(e_s, e_r, cand, scorer: str, core=None,
                         norm: str = "l2") -> torch.Tensor:
    """Score (B, d) source/relation embeddings against (B, n, d) candidate
    target embeddings; returns (B, n) raw scores, bit-identical to scoring
    each candidate individually."""
    if cand.shape[0] == 0 or cand.shape[1] == 0:
        raise ValueError("empty candidate batch")
    if scorer == "transe":
        return _neg_norm((e_s + e_r).unsqueeze(1) - cand, norm)
    v = _relation_map(core, e_s, e_r)  # (B, d_e)
    return (v.unsqueeze(1) * cand).sum(-1)
