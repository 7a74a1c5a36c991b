import math

import numpy as np
import pytest

from walksparse import (
    InputRefusedError,
    PolyCoeffs,
    RngStream,
    SparsifyConfig,
    ValidationError,
    WeightedGraph,
    dense_poly,
    similarity_check,
    sparsify_monomial,
    sparsify_poly,
)
from walksparse.sparsify import stage_one_edge_budget, stage_two_edge_budget

from conftest import er_graph, ring_graph, star_graph


class TestConfig:
    def test_epsilon_range(self):
        with pytest.raises(ValidationError):
            SparsifyConfig(epsilon=0.0)
        with pytest.raises(ValidationError):
            SparsifyConfig(epsilon=1.5)

    def test_split_budget(self):
        cfg = SparsifyConfig(epsilon=0.5, split=0.5)
        assert cfg.eps_stage_one == 0.25
        assert cfg.eps_stage_two == 0.25
        one_stage = SparsifyConfig(epsilon=0.5, second_stage=False)
        assert one_stage.eps_stage_one == 0.5


class TestBudgets:
    def test_stage_one_example(self):
        # alpha=(1), m=3, n=3, eps1=0.5, c_s=4: ceil(4*ln3/0.25*6) = 106
        cfg = SparsifyConfig(epsilon=0.5, oversample=4.0, second_stage=False)
        got = stage_one_edge_budget(PolyCoeffs.parse("1"), 3, 3, cfg)
        assert got == 106

    def test_stage_one_scales_with_mass(self):
        cfg = SparsifyConfig(epsilon=0.5, second_stage=False)
        a1 = stage_one_edge_budget(PolyCoeffs.monomial(1), 10, 50, cfg)
        a2 = stage_one_edge_budget(PolyCoeffs.monomial(2), 10, 50, cfg)
        assert a2 == pytest.approx(2 * a1, rel=0.01)

    def test_stage_two_formula(self):
        cfg = SparsifyConfig(epsilon=0.5, oversample=4.0)
        n, eps = 100, 0.25
        assert stage_two_edge_budget(n, eps, cfg) == math.ceil(
            4.0 * n * math.log(n) / eps**2
        )


class TestSparsifyPoly:
    def test_triangle_two_step(self, triangle):
        cfg = SparsifyConfig(epsilon=0.5)
        H = sparsify_poly(triangle, PolyCoeffs.parse("0,1"), cfg, RngStream(0))
        rep = similarity_check(
            H.laplacian_dense(), dense_poly(triangle, PolyCoeffs.parse("0,1")), 0.5
        )
        assert rep.passed

    def test_medium_mixture(self):
        G = er_graph(60, 0.1, 0)
        alpha = PolyCoeffs.parse("0.2,0.5,0.3")
        cfg = SparsifyConfig(epsilon=0.5)
        H = sparsify_poly(G, alpha, cfg, RngStream(1))
        rep = similarity_check(H.laplacian_dense(), dense_poly(G, alpha), 0.5)
        assert rep.passed, rep.as_kv()

    def test_weighted_graph(self):
        G = er_graph(40, 0.15, 2, weighted=True)
        alpha = PolyCoeffs.parse("0.5,0.5")
        H = sparsify_poly(G, alpha, SparsifyConfig(epsilon=0.5), RngStream(2))
        rep = similarity_check(H.laplacian_dense(), dense_poly(G, alpha), 0.5)
        assert rep.passed, rep.as_kv()

    def test_structured_graphs(self):
        for G in (ring_graph(40), star_graph(40)):
            alpha = PolyCoeffs.parse("0.5,0,0.5")
            H = sparsify_poly(G, alpha, SparsifyConfig(epsilon=0.5), RngStream(3))
            rep = similarity_check(H.laplacian_dense(), dense_poly(G, alpha), 0.5)
            assert rep.passed, rep.as_kv()

    def test_deterministic_replay(self):
        G = er_graph(30, 0.2, 4)
        alpha = PolyCoeffs.parse("0.5,0.5")
        cfg = SparsifyConfig(epsilon=0.5)
        H1 = sparsify_poly(G, alpha, cfg, RngStream(9))
        H2 = sparsify_poly(G, alpha, cfg, RngStream(9))
        assert H1 == H2

    def test_disconnected_refused(self):
        G = WeightedGraph.from_edges(6, [(0, 1, 1.0), (1, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0)])
        with pytest.raises(InputRefusedError):
            sparsify_poly(G, PolyCoeffs.parse("1"), SparsifyConfig(epsilon=0.5), RngStream(0))

    def test_disconnected_componentwise(self):
        left = er_graph(20, 0.3, 5)
        edges = [(u, v, w) for u, v, w in zip(left.edge_u, left.edge_v, left.edge_w)]
        edges += [(20 + u, 20 + v, w) for u, v, w in zip(left.edge_u, left.edge_v, left.edge_w)]
        G = WeightedGraph.from_edges(40, edges)
        cfg = SparsifyConfig(epsilon=0.5, allow_disconnected=True)
        alpha = PolyCoeffs.parse("0.5,0.5")
        H = sparsify_poly(G, alpha, cfg, RngStream(6))
        rep = similarity_check(H.laplacian_dense(), dense_poly(G, alpha), 0.5)
        assert rep.passed, rep.as_kv()

    def test_empty_graph_rejected(self):
        G = WeightedGraph.from_edges(3, [])
        with pytest.raises(ValidationError):
            sparsify_poly(G, PolyCoeffs.parse("1"), SparsifyConfig(epsilon=0.5), RngStream(0))


class TestSparsifyMonomial:
    def test_matches_poly_wrapper(self):
        G = er_graph(30, 0.2, 7)
        cfg = SparsifyConfig(epsilon=0.5)
        H1 = sparsify_monomial(G, 3, cfg, RngStream(11))
        H2 = sparsify_poly(G, PolyCoeffs.monomial(3), cfg, RngStream(11))
        assert H1 == H2

    def test_invalid_degree(self, triangle):
        with pytest.raises(ValidationError):
            sparsify_monomial(triangle, 0, SparsifyConfig(epsilon=0.5), RngStream(0))

    def test_odd_degree_accuracy(self):
        G = er_graph(50, 0.12, 8)
        H = sparsify_monomial(G, 5, SparsifyConfig(epsilon=0.5), RngStream(12))
        rep = similarity_check(H.laplacian_dense(), dense_poly(G, PolyCoeffs.monomial(5)), 0.5)
        assert rep.passed, rep.as_kv()
