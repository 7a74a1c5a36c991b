"""Build an inverse square-root factor chain for an SDDM matrix.

Each Newton step replaces M with its cubic walk polynomial (coefficients
0, 3/4, 1/4), sparsified; the collected affine factors C satisfy
C C^T ~ M^-1, which we check by measuring the eigenvalues of C^T M C.
Run with: python3 demos/03_newton_inverse_sqrt.py
"""

import numpy as np

from walksparse import (
    RngStream,
    SddmMatrix,
    SparsifyConfig,
    WeightedGraph,
    inv_sqrt_chain,
)


def random_sddm(n, p, seed):
    gen = np.random.default_rng(seed)
    mask = np.triu(gen.random((n, n)) < p, 1)
    u, v = np.nonzero(mask)
    G = WeightedGraph.from_edges(n, [(a, b, 1.0) for a, b in zip(u, v)])
    return SddmMatrix(G.degree + gen.uniform(0.5, 1.5, n), G)


def main():
    M = random_sddm(50, 0.15, seed=1)
    cfg = SparsifyConfig(epsilon=0.5, oversample=0.5, second_stage=False)
    chain = inv_sqrt_chain(M, eps_total=0.3, cfg=cfg, rng=RngStream(5))

    print(f"chain length: {len(chain)} factors, eps bound {chain.eps_bound:.3f}")
    print("contraction history:", [f"{r:.3f}" for r in chain.rho_history])
    lo, hi = chain.bracket(M)
    print(f"eigenvalues of C^T M C in [{lo:.4f}, {hi:.4f}] (target: near 1)")
    assert 0.7 <= lo <= hi <= 1.3

    # applying the chain solves M^-1/2-type problems without forming it
    x = np.random.default_rng(0).standard_normal(M.n)
    y = chain.apply(chain.apply_t(x))  # approximately M^-1 x
    residual = np.linalg.norm(M.matvec(y) - x) / np.linalg.norm(x)
    print(f"relative residual of M (C C^T x) vs x: {residual:.3f}")


if __name__ == "__main__":
    main()
