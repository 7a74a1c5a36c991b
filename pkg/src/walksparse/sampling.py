"""Weighted discrete sampling infrastructure and the core path sampler.

Paths of length r are drawn with probability proportional to
tau_p = w(p) Z(p) by picking a uniform position and a uniform edge, then
running two transition-matrix random walks outward from its endpoints.
All masses use the direction-identified convention in which the total over
length-r walks is exactly 2 r m.

Heterogeneous walk templates generalize this to walks whose steps traverse
different edge layers (e.g. the pattern A A A~ A A) under a shared degree
normalization; exact sampling there relies on absorption vectors computed
with one sparse mat-vec per position.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ValidationError
from .graph import WeightedGraph

LOG_SPACE_MIN_LENGTH = 64  # accumulate log-weights for very long walks
_CHUNK = 1 << 19


@dataclass(frozen=True)
class RngStream:
    """Reproducible RNG handle: identical (seed, stream) gives identical draws."""

    seed: int
    stream: int = 0

    def generator(self):
        return np.random.default_rng(np.random.SeedSequence((self.seed, self.stream)))

    def split(self, stream):
        return RngStream(self.seed, stream)


def _as_generator(rng):
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


class _RowAlias:
    """Alias tables over the row segments of a CSR matrix: O(1) draws."""

    def __init__(self, indptr, data):
        self.indptr = indptr
        n = len(indptr) - 1
        prob = np.ones(len(data))
        alias = np.arange(len(data), dtype=np.int64)
        rowsum = np.zeros(n)
        for row in range(n):
            s, e = indptr[row], indptr[row + 1]
            k = e - s
            if k == 0:
                continue
            seg = data[s:e]
            total = seg.sum()
            rowsum[row] = total
            if k == 1 or total <= 0:
                continue
            scaled = seg * (k / total)
            small = [i for i in range(k) if scaled[i] < 1.0]
            large = [i for i in range(k) if scaled[i] >= 1.0]
            scaled = scaled.copy()
            while small and large:
                lo = small.pop()
                hi = large.pop()
                prob[s + lo] = scaled[lo]
                alias[s + lo] = s + hi
                scaled[hi] -= 1.0 - scaled[lo]
                (small if scaled[hi] < 1.0 else large).append(hi)
            for i in small + large:
                prob[s + i] = 1.0
        self.prob = prob
        self.alias = alias
        self.rowsum = rowsum
        self.deg = np.diff(indptr)

    def draw(self, rows, gen):
        """Vectorized draw of one table position per requested row."""
        k = self.deg[rows]
        slot = self.indptr[rows] + np.minimum(
            (gen.random(len(rows)) * k).astype(np.int64), k - 1
        )
        take = gen.random(len(rows)) < self.prob[slot]
        return np.where(take, slot, self.alias[slot])


class SamplerIndex:
    """Preprocessed tables for O(1) neighbor draws and uniform edge draws."""

    def __init__(self, G: WeightedGraph):
        if G.m < 1:
            raise ValidationError("cannot build a sampler over an empty graph")
        self.graph = G
        A = G.adjacency
        self.indices = A.indices
        self.data = A.data
        self.alias = _RowAlias(A.indptr, A.data)

    def neighbor_step(self, vertices, gen):
        """One transition-matrix step from each vertex: (next, edge weight)."""
        pos = self.alias.draw(vertices, gen)
        return self.indices[pos], self.data[pos]

    def uniform_edges(self, count, gen):
        """(u, v, w) of uniformly drawn edges with uniform orientation."""
        G = self.graph
        e = gen.integers(0, G.m, count)
        flip = gen.integers(0, 2, count).astype(bool)
        a = np.where(flip, G.edge_v[e], G.edge_u[e])
        b = np.where(flip, G.edge_u[e], G.edge_v[e])
        return a, b, G.edge_w[e]


@dataclass(frozen=True)
class PathSample:
    """A sampled walk with its weight, resistance bound, and mass."""

    vertices: tuple
    weight: float
    resistance_bound: float

    @property
    def mass(self):
        return self.weight * self.resistance_bound


@dataclass
class PathBatch:
    """Struct-of-arrays batch of sampled walks."""

    u0: np.ndarray
    ur: np.ndarray
    weight: np.ndarray  # w(p), or an externally reweighted target weight
    mass: np.ndarray  # tau_p in the direction-identified convention
    vertices: np.ndarray | None = None  # (count, r+1) when recorded

    def __len__(self):
        return len(self.u0)


def total_mass(r, m):
    """Closed-form sum of w(p) Z(p) over all length-r walks."""
    if r < 1 or m < 1:
        raise ValidationError("r and m must be >= 1")
    return 2.0 * r * m


def sample_paths(idx: SamplerIndex, r, count, rng, aux=None, record_vertices=False):
    """Draw `count` length-r walks, each with probability tau_p / (2 r m).

    aux, when given, is a per-vertex factor whose product over interior
    vertices is accumulated into `weight` (used by the SDDM extension).
    Weights are accumulated in log space for r above 64.
    """
    if r < 1:
        raise ValidationError("walk length must be >= 1")
    gen = _as_generator(rng)
    G = idx.graph
    log_space = r > LOG_SPACE_MIN_LENGTH

    a, b, we = idx.uniform_edges(count, gen)
    k = gen.integers(1, r + 1, count)
    w = np.log(we) if log_space else we.copy()
    z = 2.0 / we
    # aux multiplies the target weight only; the sampling mass w(p) Z(p)
    # must stay untouched or the reweighting in graph_sampling cancels it.
    ax = np.zeros(count) if log_space else np.ones(count)
    left = a.copy()
    right = b.copy()
    verts = None
    if record_vertices:
        verts = np.zeros((count, r + 1), dtype=np.int64)
        # column j will hold u_j; fill from the pivot outward
        verts[np.arange(count), k - 1] = a
        verts[np.arange(count), k] = b

    for t in range(r - 1):
        for side, steps in (("L", k - 1), ("R", r - k)):
            active = np.nonzero(steps > t)[0]
            if len(active) == 0:
                continue
            cur = left[active] if side == "L" else right[active]
            nxt, wt = idx.neighbor_step(cur, gen)
            if log_space:
                w[active] += np.log(wt) - np.log(G.degree[cur])
            else:
                w[active] *= wt / G.degree[cur]
            if aux is not None:
                if log_space:
                    ax[active] += np.log(aux[cur])
                else:
                    ax[active] *= aux[cur]
            z[active] += 2.0 / wt
            if side == "L":
                left[active] = nxt
                if record_vertices:
                    verts[active, k[active] - 2 - t] = nxt
            else:
                right[active] = nxt
                if record_vertices:
                    verts[active, k[active] + 1 + t] = nxt

    if log_space:
        w = np.exp(w)
        ax = np.exp(ax)
    return PathBatch(u0=left, ur=right, weight=w * ax, mass=w * z, vertices=verts)


def sample_path(idx: SamplerIndex, r, rng):
    """Single-walk convenience wrapper returning a PathSample."""
    batch = sample_paths(idx, r, 1, rng, record_vertices=True)
    return PathSample(
        vertices=tuple(int(x) for x in batch.vertices[0]),
        weight=float(batch.weight[0]),
        resistance_bound=float(batch.mass[0] / batch.weight[0]),
    )


def build_index(G: WeightedGraph) -> SamplerIndex:
    return SamplerIndex(G)


def graph_sampling(draw, tau_total, M, rng, n):
    """Accumulate M reweighted samples into a sparsifier graph.

    draw(count, gen) must return a PathBatch; each open sample contributes
    weight * tau_total / (M * mass) on the edge (u0, ur). Closed samples
    (u0 == ur) are consumed but emit nothing.
    """
    if M < 1:
        raise ValidationError("sample count must be >= 1")
    gen = _as_generator(rng)
    acc = sp.csr_matrix((n, n))
    done = 0
    while done < M:
        count = min(_CHUNK, M - done)
        batch = draw(count, gen)
        open_mask = batch.u0 != batch.ur
        u = batch.u0[open_mask]
        v = batch.ur[open_mask]
        wt = batch.weight[open_mask] * (tau_total / (M * batch.mass[open_mask]))
        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        chunk = sp.coo_matrix((wt, (lo, hi)), shape=(n, n)).tocsr()
        acc = acc + chunk
        done += count
    acc = sp.triu(acc, k=1).tocoo()
    return WeightedGraph(n, acc.row, acc.col, acc.data)


# ---------------------------------------------------------------------------
# Heterogeneous walk templates
# ---------------------------------------------------------------------------


@dataclass
class WalkTemplate:
    """Ordered edge layers with per-position resistance coefficients.

    A walk (u_0 .. u_r) takes its i-th step inside layers[i-1]; all walk
    normalizations use the shared base degree vector D. Selection masses and
    exact per-step distributions come from the absorption vectors
    left[i](a) and right[i](b), which sum the normalized walk weights of the
    two partial walks hanging off a step at position i.
    """

    layers: list
    coeffs: np.ndarray
    D: np.ndarray
    left: list = field(repr=False, default=None)
    right: list = field(repr=False, default=None)
    tau_total: float = 0.0
    _selection: tuple = field(repr=False, default=None)
    _back: dict = field(repr=False, default=None)
    _fwd: dict = field(repr=False, default=None)

    @property
    def r(self):
        return len(self.layers)


def _layer_csr(layer):
    if isinstance(layer, WeightedGraph):
        return layer.adjacency
    return sp.csr_matrix(layer)


def build_template(layers, coeffs, D) -> WalkTemplate:
    """Precompute absorption vectors, selection tables, and step tables."""
    mats = [_layer_csr(layer) for layer in layers]
    r = len(mats)
    coeffs = np.asarray(coeffs, dtype=np.float64)
    D = np.asarray(D, dtype=np.float64)
    if len(coeffs) != r:
        raise ValidationError("one coefficient per layer required")
    if np.any(coeffs <= 0):
        raise ValidationError("coefficients must be positive")
    for j, mat in enumerate(mats):
        if mat.nnz == 0:
            raise ValidationError(f"layer {j} has an empty edge set")
        if mat.shape != (len(D), len(D)):
            raise ValidationError("layers must share the base vertex set")

    ones = np.ones(len(D))
    left = [None] * (r + 1)  # left[i] defined for i = 1..r
    left[1] = ones.copy()
    for i in range(1, r):
        left[i + 1] = (mats[i - 1] @ left[i]) / D
    right = [None] * (r + 1)  # right[i] defined for i = 1..r
    right[r] = ones.copy()
    for i in range(r - 1, 0, -1):
        right[i] = (mats[i] @ right[i + 1]) / D

    # flat selection table over (position i, directed edge of layer i)
    masses = []
    meta = []
    for i in range(1, r + 1):
        mat = mats[i - 1].tocoo()
        m_i = coeffs[i - 1] * left[i][mat.row] * right[i][mat.col]
        masses.append(m_i)
        meta.append((np.full(len(m_i), i, dtype=np.int64), mat.row, mat.col, mat.data))
    flat_mass = np.concatenate(masses)
    cum = np.cumsum(flat_mass)
    sel_pos = np.concatenate([t[0] for t in meta])
    sel_a = np.concatenate([t[1] for t in meta])
    sel_b = np.concatenate([t[2] for t in meta])
    sel_w = np.concatenate([t[3] for t in meta])

    tmpl = WalkTemplate(layers=mats, coeffs=coeffs, D=D, left=left, right=right)
    tmpl.tau_total = 0.5 * float(cum[-1])
    tmpl._selection = (cum, sel_pos, sel_a, sel_b, sel_w)
    # step tables reweighted by the remaining absorption
    tmpl._back = {}
    tmpl._fwd = {}
    for j in range(1, r):  # backward through layer j chooses u_{j-1}
        mat = mats[j - 1]
        data = mat.data * left[j][mat.indices]
        tmpl._back[j] = (_RowAlias(mat.indptr, data), mat.indices, mat.data)
    for j in range(2, r + 1):  # forward through layer j chooses u_j
        mat = mats[j - 1]
        data = mat.data * right[j][mat.indices]
        tmpl._fwd[j] = (_RowAlias(mat.indptr, data), mat.indices, mat.data)
    return tmpl


def sample_template_paths(tmpl: WalkTemplate, count, rng, record_vertices=False):
    """Draw walks from a template with probability tau_p / sum(tau)."""
    gen = _as_generator(rng)
    r = tmpl.r
    D = tmpl.D
    cum, sel_pos, sel_a, sel_b, sel_w = tmpl._selection
    pick = np.searchsorted(cum, gen.random(count) * cum[-1], side="right")
    pick = np.minimum(pick, len(cum) - 1)
    pos = sel_pos[pick]
    a = sel_a[pick].copy()
    b = sel_b[pick].copy()
    w = sel_w[pick].copy()
    z = tmpl.coeffs[pos - 1] / w
    interior_a = pos - 1 >= 1
    interior_b = pos <= r - 1
    w[interior_a] /= D[a[interior_a]]
    w[interior_b] /= D[b[interior_b]]
    verts = None
    if record_vertices:
        verts = np.zeros((count, r + 1), dtype=np.int64)
        verts[np.arange(count), pos - 1] = a
        verts[np.arange(count), pos] = b

    left_end = a.copy()
    right_end = b.copy()
    for i in range(1, r + 1):
        grp = np.nonzero(pos == i)[0]
        if len(grp) == 0:
            continue
        cur = left_end[grp]
        for j in range(i - 1, 0, -1):
            alias, indices, raw = tmpl._back[j]
            slot = alias.draw(cur, gen)
            nxt, wt = indices[slot], raw[slot]
            w[grp] *= wt
            if j - 1 >= 1:
                w[grp] /= D[nxt]
            z[grp] += tmpl.coeffs[j - 1] / wt
            if record_vertices:
                verts[grp, j - 1] = nxt
            cur = nxt
        left_end[grp] = cur
        cur = right_end[grp]
        for j in range(i + 1, r + 1):
            alias, indices, raw = tmpl._fwd[j]
            slot = alias.draw(cur, gen)
            nxt, wt = indices[slot], raw[slot]
            w[grp] *= wt
            if j <= r - 1:
                w[grp] /= D[nxt]
            z[grp] += tmpl.coeffs[j - 1] / wt
            if record_vertices:
                verts[grp, j] = nxt
            cur = nxt
        right_end[grp] = cur

    return PathBatch(u0=left_end, ur=right_end, weight=w, mass=w * z, vertices=verts)
