"""Walk-polynomial sparsification for SDDM matrices D - A with slack.

The off-diagonal graph is sampled with respect to its own degrees D_g;
the mismatch against the SDDM diagonal D is folded into each walk's target
weight as the per-interior-vertex ratio D_g(u) / D(u), which never exceeds
one. The excess diagonal of the polynomial is computed exactly by sparse
matrix-vector products and returned alongside the sampled graph.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import InputRefusedError, ValidationError
from .graph import PolyCoeffs, SddmMatrix, WeightedGraph
from .sampling import RngStream, SamplerIndex, graph_sampling
from .sparsify import SparsifyConfig, _mixture_draw, stage_one_edge_budget

log = logging.getLogger(__name__)


def extra_diagonal(M: SddmMatrix, alpha: PolyCoeffs) -> np.ndarray:
    """Row sums of the SDDM walk polynomial, diag(M_alpha 1), exactly.

    Uses t_{r+1} = A (D^-1 t_r) with t_1 = A 1, so only sparse matvecs of
    the off-diagonal part are needed.
    """
    D = M.diag
    A = M.offdiag.adjacency
    Dinv = np.where(D > 0, 1.0 / np.where(D > 0, D, 1.0), 0.0)
    out = D.astype(np.float64).copy()
    t = np.asarray(A @ np.ones(M.n)).ravel()
    for r, a_r in enumerate(alpha.alpha, start=1):
        if a_r:
            out -= a_r * t
        if r < alpha.d:
            t = np.asarray(A @ (Dinv * t)).ravel()
    return out


@dataclass
class SddmPolyResult:
    """Sparsified SDDM polynomial in split form L_H + diag(extra)."""

    graph: WeightedGraph
    extra: np.ndarray

    def dense(self):
        out = -self.graph.adjacency_dense()
        np.fill_diagonal(out, self.graph.degree + self.extra)
        return out

    def sddm(self) -> SddmMatrix:
        return SddmMatrix(self.graph.degree + np.maximum(self.extra, 0.0), self.graph)

    def matvec(self, x):
        g = self.graph
        return g.degree * x - g.adjacency @ x + self.extra * x


def sparsify_sddm(M: SddmMatrix, alpha: PolyCoeffs, cfg: SparsifyConfig, rng) -> SddmPolyResult:
    """Sparsifier of M_alpha = D - sum_r alpha_r D (D^-1 A)^r."""
    G = M.offdiag
    if G.m < 1:
        raise ValidationError("off-diagonal part has no edges")
    extra = extra_diagonal(M, alpha)
    if np.min(extra) < -1e-9 * np.max(M.diag):
        raise ValidationError("polynomial row sums went negative; input is not SDDM enough")

    if not G.is_connected():
        if not cfg.allow_disconnected:
            raise InputRefusedError(
                "off-diagonal graph is disconnected; sparsify components separately "
                "(pass allow_disconnected)"
            )
        return _sparsify_sddm_components(M, alpha, cfg, rng, extra)

    idx = SamplerIndex(G)
    aux = np.where(M.diag > 0, G.degree / M.diag, 0.0)
    draw, tau = _mixture_draw(idx, alpha, aux=aux)
    count = stage_one_edge_budget(alpha, G.m, G.n, cfg)
    H = graph_sampling(draw, tau, count, rng, G.n)
    if cfg.second_stage:
        from .resistance import resparsify

        if H.is_connected():
            sub = rng.split(1) if isinstance(rng, RngStream) else rng
            H = resparsify(H, cfg.eps_stage_two, cfg, sub)
        else:
            log.warning("sampled graph disconnected; skipping second-stage resparsify")
    return SddmPolyResult(graph=H, extra=np.maximum(extra, 0.0))


def _sparsify_sddm_components(M, alpha, cfg, rng, extra):
    from .sparsify import _split_components

    G = M.offdiag
    parts = []
    for k, (verts, sub) in enumerate(_split_components(G)):
        sub_m = SddmMatrix(M.diag[verts], sub)
        rng_k = rng.split(2000 + k) if isinstance(rng, RngStream) else rng
        res = sparsify_sddm(sub_m, alpha, cfg, rng_k)
        H = res.graph
        parts.extend((verts[u], verts[v], w) for u, v, w in zip(H.edge_u, H.edge_v, H.edge_w))
    graph = WeightedGraph.from_edges(G.n, parts)
    return SddmPolyResult(graph=graph, extra=np.maximum(extra, 0.0))
