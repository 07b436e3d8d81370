"""
Edge curvature on a few small graphs
====================================

Bridges are negatively curved, edges inside cliques are positive.
The cheap degree/triangle bound never exceeds the exact transport value.
"""

import numpy as np

from curverewire.curvature import bfc_all, jlc_all, ollivier_all
from curverewire.data import complete_graph, gen_binary_tree, two_triangle_bridge

# two triangles joined by one edge
g = two_triangle_bridge()
jlc, orc = jlc_all(g), ollivier_all(g)
for (u, v), a, b in zip(g.edges, jlc.values, orc.values):
    print(f"({u},{v})  jlc={a:+.3f}  ollivier={b:+.3f}")

# the bridge is the most negative edge under both metrics
print("argmin jlc:", g.edges[np.argmin(jlc.values)])

# a complete graph is positively curved everywhere, a tree is not
for name, h in (("K6", complete_graph(6)), ("tree depth 4", gen_binary_tree(4))):
    print(name, "jlc range", jlc_all(h).values.min(), jlc_all(h).values.max(),
          "bfc range", bfc_all(h).values.min(), bfc_all(h).values.max())
