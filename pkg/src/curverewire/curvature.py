"""Edge curvatures: Jost-Liu lower bound, exact Ollivier-Ricci, Balanced Forman.

``jlc`` only needs the two endpoint degrees and the triangle count of an
edge, so the whole-graph pass is a single sparse product. Balanced Forman
curvature also needs 4-cycle statistics per edge and is computed with an
explicit neighbourhood walk.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph, all_pairs_distances, triangle_count
from .transport import min_cost_transport

METRICS = ("jlc", "bfc", "ollivier_exact")


@dataclass(frozen=True)
class CurvatureVector:
    values: np.ndarray
    metric: str
    graph_fingerprint: str

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def to_csv(self, g: Graph, path: str | Path) -> None:
        if g.fingerprint != self.graph_fingerprint:
            raise ValueError("curvature vector was computed on a different graph")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# metric={self.metric}\n# fingerprint={self.graph_fingerprint}\n")
            fh.write("u,v,value\n")
            for (u, v), x in zip(g.edges, self.values):
                fh.write(f"{u},{v},{format(float(x), '.17g')}\n")

    @classmethod
    def from_csv(cls, path: str | Path) -> tuple["CurvatureVector", np.ndarray]:
        """Returns the vector and the ``(m, 2)`` edge array read alongside it."""
        meta: dict[str, str] = {}
        edges, vals = [], []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                s = line.strip()
                if not s:
                    continue
                if s.startswith("#"):
                    key, _, val = s[1:].strip().partition("=")
                    meta[key] = val
                    continue
                if s == "u,v,value":
                    continue
                u, v, x = s.split(",")
                edges.append((int(u), int(v)))
                vals.append(float(x))
        vec = cls(np.asarray(vals, dtype=np.float64), meta.get("metric", "jlc"), meta.get("fingerprint", ""))
        return vec, np.asarray(edges, dtype=np.int64).reshape(-1, 2)


def _jlc_formula(di, dj, t):
    di = np.asarray(di, dtype=np.float64)
    dj = np.asarray(dj, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    lo = np.minimum(di, dj)
    hi = np.maximum(di, dj)
    base = 1.0 - 1.0 / di - 1.0 / dj
    return -np.maximum(base - t / lo, 0.0) - np.maximum(base - t / hi, 0.0) + t / hi


def jlc_edge(g: Graph, i: int, j: int) -> float:
    """Jost-Liu curvature bound of the pair ``(i, j)`` in ``g``."""
    di, dj = int(g.degrees[i]), int(g.degrees[j])
    if di == 0 or dj == 0:
        raise ValueError(f"JLC undefined: node {i if di == 0 else j} has degree 0")
    return float(_jlc_formula(di, dj, triangle_count(g, i, j)))


def edge_triangle_counts(g: Graph) -> np.ndarray:
    """Common-neighbour count of every edge, in canonical edge order."""
    if g.m == 0:
        return np.zeros(0, dtype=np.int64)
    A = g.adjacency_matrix
    T = (A @ A).multiply(A).tocsr()
    r, c = g.edges[:, 0], g.edges[:, 1]
    return np.asarray(T[r, c]).ravel().astype(np.int64)


def jlc_for_edges(g: Graph, pairs: np.ndarray) -> np.ndarray:
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    t = np.fromiter((triangle_count(g, int(a), int(b)) for a, b in pairs), dtype=np.int64, count=pairs.shape[0])
    d = g.degrees
    return _jlc_formula(d[pairs[:, 0]], d[pairs[:, 1]], t)


def jlc_all(g: Graph) -> CurvatureVector:
    d = g.degrees
    vals = _jlc_formula(d[g.edges[:, 0]], d[g.edges[:, 1]], edge_triangle_counts(g))
    return CurvatureVector(np.asarray(vals, dtype=np.float64).reshape(-1), "jlc", g.fingerprint)


def ollivier_exact(g: Graph, i: int, j: int, dist: np.ndarray | None = None) -> float:
    """``1 - W1(mu_i, mu_j)`` with ``mu_v`` uniform on the neighbours of ``v``.

    No idleness; the ground metric is hop distance. Masses are scaled by
    ``d_i * d_j`` so the transport problem is integral and solved exactly.
    """
    Ni, Nj = g.neighbors(i), g.neighbors(j)
    di, dj = Ni.shape[0], Nj.shape[0]
    if di == 0 or dj == 0:
        raise ValueError("Ollivier curvature needs both endpoints to have neighbours")
    if dist is None:
        dist = all_pairs_distances(g)
    cost = dist[np.ix_(Ni, Nj)]
    if not np.isfinite(cost).all():
        raise ValueError("endpoint neighbourhoods lie in different components")
    total, _ = min_cost_transport(np.full(di, dj), np.full(dj, di), cost.astype(np.int64))
    return 1.0 - total / (di * dj)


def ollivier_all(g: Graph) -> CurvatureVector:
    dist = all_pairs_distances(g)
    vals = np.array([ollivier_exact(g, int(u), int(v), dist) for u, v in g.edges], dtype=np.float64)
    return CurvatureVector(vals, "ollivier_exact", g.fingerprint)


def _bfc_from_sets(Ni: set, Nj: set, nbrs, i: int, j: int) -> float:
    di, dj = len(Ni), len(Nj)
    tri = len(Ni & Nj)
    hi, lo = max(di, dj), min(di, dj)
    sq_i = sq_j = 0
    gamma = 0
    for k in Ni:
        if k == j or k in Nj:
            continue
        c = sum(1 for w in nbrs(k) if w in Nj and w not in Ni and w != i)
        if c:
            sq_i += 1
            gamma = max(gamma, c)
    for w in Nj:
        if w == i or w in Ni:
            continue
        c = sum(1 for z in nbrs(w) if z in Ni and z not in Nj and z != j)
        if c:
            sq_j += 1
            gamma = max(gamma, c)
    val = 2.0 / di + 2.0 / dj - 2.0 + 2.0 * tri / hi + tri / lo
    if gamma > 0:
        val += (sq_i + sq_j) / (gamma * hi)
    return val


def bfc_edge(g: Graph, i: int, j: int) -> float:
    """Balanced Forman curvature of edge ``(i, j)``.

    Degree terms, triangle terms, and the 4-cycle term weighted by the
    largest number of 4-cycles through a single neighbour. Leaf edges keep
    their degree terms.
    """
    Ni = set(g.neighbors(i).tolist())
    Nj = set(g.neighbors(j).tolist())
    return _bfc_from_sets(Ni, Nj, lambda k: g.neighbors(k).tolist(), i, j)


def bfc_all(g: Graph) -> CurvatureVector:
    sets = [set(g.neighbors(v).tolist()) for v in range(g.n)]
    vals = np.array(
        [_bfc_from_sets(sets[u], sets[v], sets.__getitem__, int(u), int(v)) for u, v in g.edges.tolist()],
        dtype=np.float64,
    )
    return CurvatureVector(vals, "bfc", g.fingerprint)


def compute(g: Graph, metric: str = "jlc") -> CurvatureVector:
    if metric == "jlc":
        return jlc_all(g)
    if metric == "bfc":
        return bfc_all(g)
    if metric == "ollivier_exact":
        return ollivier_all(g)
    raise ValueError(f"unknown curvature metric {metric!r}; expected one of {METRICS}")


def curvature_profile(g: Graph, metric: str = "jlc", bins: int = 20) -> dict:
    """Summary statistics of a whole-graph curvature pass, with its wall time."""
    t0 = time.perf_counter()
    vec = compute(g, metric)
    elapsed = time.perf_counter() - t0
    lo, hi = (-2.0, 1.0) if metric == "jlc" else (-2.0, 2.0)
    counts, edges = np.histogram(np.clip(vec.values, lo, hi), bins=bins, range=(lo, hi))
    if len(vec) == 0:
        return {
            "metric": metric, "count": 0, "min": None, "max": None, "mean": None,
            "argmin_edge": None, "histogram": counts.tolist(), "bin_edges": edges.tolist(), "seconds": elapsed,
        }
    k = int(np.argmin(vec.values))
    return {
        "metric": metric,
        "count": len(vec),
        "min": float(vec.values.min()),
        "max": float(vec.values.max()),
        "mean": float(vec.values.mean()),
        "argmin_edge": [int(g.edges[k, 0]), int(g.edges[k, 1])],
        "argmin_index": k,
        "histogram": counts.tolist(),
        "bin_edges": edges.tolist(),
        "seconds": elapsed,
    }
