#!/usr/bin/env python3
"""Encode continuous route polylines into a discrete sector graph.

Builds a small airspace by hand — two routes that cross mid-leg and merge at
a cluster of closely-spaced fixes — runs the encoder, and prints what came
out: nodes, routes, intersections, and the edge-length distribution.
"""

import math

from atcgen import geometry
from atcgen.encoder import ContinuousSector, EncoderConfig, encode_sector

# A gently-kinked west-east airway (RA) and a second airway (RB) that climbs
# across it and joins the same terminal fix cluster. All coordinates in nmi.
y = math.sqrt(41 ** 2 - 20 ** 2)
sector = ContinuousSector(
    fixes={
        "ENTRY": (0.0, 0.0),
        "KINK": (40.0, 1.5),            # a 2-degree wiggle: simplified away
        "TERM1": (116.0, -2.0),          # three fixes within 20 nmi of each
        "TERM2": (120.0, 4.0),           # other: clustered into one node
        "TERM3": (124.0, -2.0),
        "SOUTH": (50.0, -1.5 * y),
        "RIDGE": (100.0, y),
    },
    routes={
        "RA": ["ENTRY", "KINK", "TERM1"],
        "RB": ["SOUTH", "RIDGE", "TERM2"],
    })

graph = encode_sector(sector, EncoderConfig(spacing=20.0))

print(f"{len(graph.nodes)} nodes, spacing {graph.spacing} nmi")
for rid, seq in graph.routes.items():
    length = geometry.polyline_length([graph.nodes[n] for n in seq])
    print(f"  route {rid}: {' -> '.join(seq)}  ({length:.0f} nmi)")

print("intersections (nodes shared by both routes):")
for node in graph.intersection_nodes():
    x, yy = graph.nodes[node]
    print(f"  {node} at ({x:.1f}, {yy:.1f}) "
          f"via {', '.join(graph.routes_through(node))}")

lengths = sorted(geometry.dist(graph.nodes[a], graph.nodes[b])
                 for a, b in graph.edges())
print(f"edge lengths: {lengths[0]:.1f} .. {lengths[-1]:.1f} nmi "
      f"({len(lengths)} edges)")
print(f"off-node crossings: {graph.off_node_crossings()}")
