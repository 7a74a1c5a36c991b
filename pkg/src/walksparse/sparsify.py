"""Sparsification of random-walk matrix polynomials by path sampling.

Stage one draws walks with masses tau_p = alpha_r w(p) Z(p) (walk lengths
picked proportionally to alpha_r * 2 r m so the estimator is unbiased) and
aggregates the endpoint edges. Stage two re-sparsifies the explicit result
down to the n log n budget using solver-estimated effective resistances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import InputRefusedError, ValidationError
from .graph import PolyCoeffs, WeightedGraph
from .sampling import RngStream, SamplerIndex, graph_sampling, sample_paths, total_mass


@dataclass(frozen=True)
class SparsifyConfig:
    """Knobs shared by every sampling stage.

    split is the fraction of the epsilon budget spent in stage one;
    oversample is the leading constant c_s in every sample-count formula.
    """

    epsilon: float
    oversample: float = 4.0
    second_stage: bool = True
    split: float = 0.5
    allow_disconnected: bool = False
    dense_threshold: int = 512

    def __post_init__(self):
        if not (0 < self.epsilon <= 1):
            raise ValidationError("epsilon must lie in (0, 1]")
        if self.oversample <= 0:
            raise ValidationError("oversample constant must be positive")
        if not (0 < self.split < 1):
            raise ValidationError("split must lie in (0, 1)")

    @property
    def eps_stage_one(self):
        return self.split * self.epsilon if self.second_stage else self.epsilon

    @property
    def eps_stage_two(self):
        return (1 - self.split) * self.epsilon


def _log_n(n):
    return max(math.log(n), math.log(2))


def stage_one_edge_budget(alpha: PolyCoeffs, m, n, cfg: SparsifyConfig):
    """Sample count M = ceil(c_s ln n / eps1^2 * sum_r alpha_r 2 r m)."""
    tau = sum(a * total_mass(r, m) for r, a in enumerate(alpha.alpha, start=1) if a > 0)
    return int(math.ceil(cfg.oversample * _log_n(n) / cfg.eps_stage_one**2 * tau))


def stage_two_edge_budget(n, eps, cfg: SparsifyConfig):
    return int(math.ceil(cfg.oversample * n * _log_n(n) / eps**2))


def _mixture_draw(idx: SamplerIndex, alpha: PolyCoeffs, aux=None):
    """Draw callable mixing walk lengths proportionally to alpha_r 2 r m."""
    m = idx.graph.m
    lengths = np.array([r for r, a in enumerate(alpha.alpha, start=1) if a > 0])
    weights = np.array([alpha.alpha[r - 1] * total_mass(r, m) for r in lengths])
    probs = weights / weights.sum()

    def draw(count, gen):
        counts = gen.multinomial(count, probs)
        batches = []
        for r, c in zip(lengths, counts):
            if c == 0:
                continue
            batch = sample_paths(idx, int(r), int(c), gen, aux=aux)
            a_r = alpha.alpha[r - 1]
            batch.weight = batch.weight * a_r
            batch.mass = batch.mass * a_r
            batches.append(batch)
        from .sampling import PathBatch

        return PathBatch(
            u0=np.concatenate([b.u0 for b in batches]),
            ur=np.concatenate([b.ur for b in batches]),
            weight=np.concatenate([b.weight for b in batches]),
            mass=np.concatenate([b.mass for b in batches]),
        )

    return draw, float(weights.sum())


def _require_connected(G: WeightedGraph, cfg: SparsifyConfig):
    if not G.is_connected() and not cfg.allow_disconnected:
        raise InputRefusedError(
            "graph is disconnected; effective-resistance bounds need paths between "
            "sampled endpoints (pass allow_disconnected to process components separately)"
        )


def _split_components(G: WeightedGraph):
    ncomp, labels = connected_components(G.adjacency, directed=False)
    for c in range(ncomp):
        verts = np.nonzero(labels == c)[0]
        if len(verts) < 2:
            continue
        remap = -np.ones(G.n, dtype=np.int64)
        remap[verts] = np.arange(len(verts))
        mask = remap[G.edge_u] >= 0
        yield verts, WeightedGraph(
            len(verts), remap[G.edge_u[mask]], remap[G.edge_v[mask]], G.edge_w[mask]
        )


def sparsify_poly(G: WeightedGraph, alpha: PolyCoeffs, cfg: SparsifyConfig, rng) -> WeightedGraph:
    """Sparsifier H with L_H ~ L_alpha(G) within exp(+-epsilon) w.h.p."""
    if G.m < 1:
        raise ValidationError("graph has no edges")
    if not G.is_connected():
        if not cfg.allow_disconnected:
            _require_connected(G, cfg)
        parts = []
        for k, (verts, sub) in enumerate(_split_components(G)):
            rng_k = rng.split(1000 + k) if isinstance(rng, RngStream) else rng
            H = sparsify_poly(sub, alpha, cfg, rng_k)
            parts.extend((verts[u], verts[v], w) for u, v, w in zip(H.edge_u, H.edge_v, H.edge_w))
        return WeightedGraph.from_edges(G.n, parts)

    idx = SamplerIndex(G)
    draw, tau = _mixture_draw(idx, alpha)
    M = stage_one_edge_budget(alpha, G.m, G.n, cfg)
    H = graph_sampling(draw, tau, M, rng, G.n)
    if cfg.second_stage:
        from .resistance import resparsify

        H = resparsify(H, cfg.eps_stage_two, cfg, rng if not isinstance(rng, RngStream) else rng.split(1))
    return H


def sparsify_monomial(G: WeightedGraph, r, cfg: SparsifyConfig, rng) -> WeightedGraph:
    """Sparsify the r-step walk Laplacian D - D (D^-1 A)^r."""
    if r < 1:
        raise ValidationError("monomial degree must be >= 1")
    return sparsify_poly(G, PolyCoeffs.monomial(r), cfg, rng)


def with_epsilon(cfg: SparsifyConfig, eps):
    return replace(cfg, epsilon=eps)
