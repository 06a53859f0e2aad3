"""Continuous-route encoder: clustering, simplification, planarization,
interpolation, and end-to-end properties on a curved two-route fixture."""

import math

import pytest

from atcgen import geometry
from atcgen.core import InvalidSector
from atcgen.encoder import (ContinuousSector, DegenerateRoute, EncoderConfig,
                            NonPlanarizable, cluster_fixes, count_intersections,
                            encode_sector, graph_to_continuous, simplify_route)


def edge_lengths(g):
    return [geometry.dist(g.nodes[a], g.nodes[b]) for a, b in g.edges()]


class TestClustering:
    def test_nearby_fixes_merge_to_centroid(self):
        sector = ContinuousSector(
            fixes={"A": (0.0, 0.0), "B": (10.0, 0.0), "C": (100.0, 0.0)},
            routes={"R1": ["A", "C"], "R2": ["B", "C"]})
        assignment, centroids = cluster_fixes(sector, EncoderConfig())
        assert assignment["A"] == assignment["B"] != assignment["C"]
        assert centroids[assignment["A"]] == (5.0, 0.0)

    def test_chained_merging_is_single_linkage(self):
        # A-B and B-C are each under the radius; A-C is not, but the chain
        # still collapses into one cluster
        sector = ContinuousSector(
            fixes={"A": (0.0, 0.0), "B": (15.0, 0.0), "C": (30.0, 0.0),
                   "D": (200.0, 0.0)},
            routes={"R1": ["A", "D"]})
        assignment, _ = cluster_fixes(sector, EncoderConfig())
        assert assignment["A"] == assignment["B"] == assignment["C"]

    def test_separation_at_exact_radius_does_not_merge(self):
        sector = ContinuousSector(
            fixes={"A": (0.0, 0.0), "B": (20.0, 0.0)},
            routes={"R1": ["A", "B"]})
        assignment, _ = cluster_fixes(sector, EncoderConfig())
        assert assignment["A"] != assignment["B"]


class TestSimplification:
    def test_small_kink_removed(self):
        pts = [(0.0, 0.0), (50.0, 2.0), (100.0, 0.0)]
        out = simplify_route(pts, EncoderConfig())
        assert out == [(0.0, 0.0), (100.0, 0.0)]

    def test_sharp_turn_kept(self):
        pts = [(0.0, 0.0), (50.0, 0.0), (50.0, 50.0)]
        assert simplify_route(pts, EncoderConfig()) == pts

    def test_protected_point_survives(self):
        pts = [(0.0, 0.0), (50.0, 2.0), (100.0, 0.0)]
        out = simplify_route(pts, EncoderConfig(), protected=[(50.0, 2.0)])
        assert out == pts

    def test_length_drift_capped_at_five_percent(self):
        # a zig-zag whose removal one kink at a time would eventually shorten
        # the line well beyond 5 percent
        pts = [(float(x), 14.0 * (x // 10 % 2)) for x in range(0, 110, 10)]
        out = simplify_route(pts, EncoderConfig(kink_tolerance=180.0))
        drift = abs(geometry.polyline_length(out) - geometry.polyline_length(pts))
        assert drift <= 0.05 * geometry.polyline_length(pts) + 1e-9


class TestEncodeErrors:
    def test_degenerate_route(self):
        sector = ContinuousSector(
            fixes={"A": (0.0, 0.0), "B": (5.0, 0.0), "C": (300.0, 300.0),
                   "D": (400.0, 300.0)},
            routes={"R1": ["A", "B"], "R2": ["C", "D"]})
        with pytest.raises(DegenerateRoute) as err:
            encode_sector(sector)
        assert err.value.route_id == "R1"

    def test_skewed_overlap_not_planarizable(self):
        # nearly-parallel routes running on top of each other at a slight
        # skew: crossing points are ill-defined
        sector = ContinuousSector(
            fixes={"A": (0.0, 0.0), "B": (300.0, 0.0),
                   "C": (100.0, 0.3), "D": (250.0, 0.9)},
            routes={"R1": ["A", "B"], "R2": ["C", "D"]})
        with pytest.raises(NonPlanarizable):
            encode_sector(sector)


class TestEncodeSimple:
    def test_straight_route_subdivided_at_spacing(self):
        sector = ContinuousSector(
            fixes={"A": (0.0, 0.0), "B": (100.0, 0.0)},
            routes={"R1": ["A", "B"]})
        g = encode_sector(sector)
        assert g.routes["R1"] == [f"N{i}" for i in range(6)]
        assert all(abs(d - 20.0) < 1e-9 for d in edge_lengths(g))

    def test_crossing_becomes_shared_node(self):
        sector = ContinuousSector(
            fixes={"A": (0.0, 0.0), "B": (80.0, 0.0),
                   "C": (40.0, -40.0), "D": (40.0, 40.0)},
            routes={"R1": ["A", "B"], "R2": ["C", "D"]})
        g = encode_sector(sector)
        [shared] = g.intersection_nodes()
        assert g.nodes[shared] == (40.0, 0.0)
        assert g.off_node_crossings() == []

    def test_node_ids_are_dense_and_position_ordered(self):
        sector = ContinuousSector(
            fixes={"A": (0.0, 0.0), "B": (100.0, 0.0)},
            routes={"R1": ["B", "A"]})  # flown right-to-left
        g = encode_sector(sector)
        assert sorted(g.nodes) == [f"N{i}" for i in range(len(g.nodes))]
        xs = [g.nodes[f"N{i}"][0] for i in range(len(g.nodes))]
        assert xs == sorted(xs)


class TestCurvedPairFixture:
    """End-to-end properties on the two-route fixture with a kink, a mid-leg
    crossing, and a merging fix cluster (values frozen from a hand check)."""

    def test_structure(self, curved_pair_sector):
        g = encode_sector(curved_pair_sector)
        assert len(g.nodes) == 13
        assert g.routes["RA"] == ["N0", "N1", "N2", "N5", "N7", "N9", "N12"]
        assert g.routes["RB"] == ["N3", "N4", "N6", "N7", "N8", "N10", "N11",
                                  "N12"]

    def test_exactly_two_intersections(self, curved_pair_sector):
        g = encode_sector(curved_pair_sector)
        assert g.intersection_nodes() == ["N7", "N12"]
        assert count_intersections(g) == 2

    def test_crossing_node_sits_on_both_tracks(self, curved_pair_sector):
        g = encode_sector(curved_pair_sector)
        x, y = g.nodes["N7"]
        assert abs(y) < 1.0 and 60.0 < x < 100.0

    def test_edge_lengths_near_spacing(self, curved_pair_sector):
        g = encode_sector(curved_pair_sector)
        lengths = edge_lengths(g)
        assert min(lengths) >= 10.0 and max(lengths) <= 30.0
        g.check(edge_lengths=True)

    def test_planar(self, curved_pair_sector):
        g = encode_sector(curved_pair_sector)
        assert g.off_node_crossings() == []
        g.check(planarity=True)

    def test_idempotent_re_encode(self, curved_pair_sector):
        g1 = encode_sector(curved_pair_sector)
        g2 = encode_sector(graph_to_continuous(g1))
        paths1 = {rid: [g1.nodes[n] for n in seq]
                  for rid, seq in g1.routes.items()}
        paths2 = {rid: [g2.nodes[n] for n in seq]
                  for rid, seq in g2.routes.items()}
        for rid in paths1:
            assert len(paths1[rid]) == len(paths2[rid])
            assert all(geometry.dist(p, q) < 1e-6
                       for p, q in zip(paths1[rid], paths2[rid]))
