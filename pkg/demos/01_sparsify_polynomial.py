"""Sparsify a random-walk matrix polynomial and verify it against the dense oracle.

Builds an Erdos-Renyi graph, sparsifies L_alpha(G) = D - sum_r alpha_r D (D^-1 A)^r
for a degree-4 coefficient mixture, and reports the spectral bracket and edge
counts. Run with: python3 demos/01_sparsify_polynomial.py
"""

import numpy as np

from walksparse import (
    PolyCoeffs,
    RngStream,
    SparsifyConfig,
    WeightedGraph,
    dense_poly,
    similarity_check,
    sparsify_poly,
)


def random_graph(n, p, seed):
    gen = np.random.default_rng(seed)
    mask = np.triu(gen.random((n, n)) < p, 1)
    u, v = np.nonzero(mask)
    return WeightedGraph.from_edges(n, list(zip(u, v, gen.uniform(0.5, 2.0, len(u)))))


def main():
    G = random_graph(400, 0.5, seed=0)
    alpha = PolyCoeffs.parse("0.4,0.3,0.2,0.1")
    eps = 0.6
    cfg = SparsifyConfig(epsilon=eps, oversample=1.0)

    print(f"input: n={G.n} edges={G.m}, coefficients={[float(a) for a in alpha.alpha]}")
    H = sparsify_poly(G, alpha, cfg, RngStream(42))
    print(f"sparsifier: edges={H.m} ({H.m / G.m:.1%} of input)")

    report = similarity_check(H.laplacian_dense(), dense_poly(G, alpha), eps)
    print(report.as_kv())
    assert report.passed


if __name__ == "__main__":
    main()
