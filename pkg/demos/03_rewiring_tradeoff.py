"""
Adding versus removing edges
============================

Greedy edge additions from the curvature bank raise the spectral gap;
greedy removals of the most negatively curved edges slow mixing down.
On a two-block SBM both trends are clean. On Erdos-Renyi graphs they are
much noisier (see README).
"""

import numpy as np

from curverewire import experiments as ex
from curverewire.data import gen_erdos_renyi, gen_sbm

rng = np.random.default_rng(0)
for name, g in (("sbm", gen_sbm([50, 50], 0.5, 0.02, rng).graph),
                ("er", gen_erdos_renyi(100, 0.08, np.random.default_rng(0)))):
    rows = ex.tradeoff(g, 20)
    print(name, "add/lambda2 trend", round(ex.trend(rows, "add", "lambda2"), 3),
          "remove/mixing trend", round(ex.trend(rows, "remove", "mixing_steps"), 3))
    for r in rows[:4]:
        print("   ", r)
