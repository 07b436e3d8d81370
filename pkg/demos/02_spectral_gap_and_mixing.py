"""
Spectral gap, bottlenecks and random-walk mixing
================================================

A small Cheeger constant means a bottleneck, a small spectral gap
and a slowly mixing walk. The three views agree on a barbell-like graph.
"""

from curverewire.data import complete_graph, cycle_graph, two_triangle_bridge
from curverewire.spectral import (
    cheeger_constant_exact,
    empirical_mixing_time,
    mixing_steps,
    mixing_time_upper_bound,
    spectral_extremes,
)

eps = 5e-4
for name, g in (("K6", complete_graph(6)), ("C10", cycle_graph(10)), ("bridge", two_triangle_bridge())):
    lam2, lamN = spectral_extremes(g)
    h = cheeger_constant_exact(g).h
    f = mixing_steps(lam2, eps, int(g.degrees.max()), int(g.degrees.min()))
    # C10 is bipartite: the plain walk oscillates, so the lazy walk is used there
    tau = empirical_mixing_time(g, eps)
    print(f"{name:7s} lambda2={lam2:.4f}  h={h:.4f}  f={f:8.2f}  "
          f"tau={tau:4d}  bound={mixing_time_upper_bound(g, eps, h):8.1f}")
