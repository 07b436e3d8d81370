"""
Training an SGC with per-step stochastic rewiring
=================================================

The edge bank is built once; every epoch draws fresh drops and additions.
Evaluation always runs on the untouched graph.
"""

from curverewire import experiments as ex

task = ex.SBMTask(feature_sigma=1.0)
ds, splits = task(0)
print("graph", ds.graph.n, "nodes", ds.graph.m, "edges")

for config in ({"pA": 0.0, "pD": 0.0, "alpha": 1.0},
               {"pA": 0.1, "pD": 0.1, "alpha": 0.5}):
    out = ex.run_config(ds, splits, config, seed=0, epochs=300)
    print(config, {k: round(v, 4) if isinstance(v, float) else v for k, v in out.items()})
