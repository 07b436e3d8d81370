"""Stochastic curvature-guided rewiring.

A pre-pass collects candidate edges that close triangles around the most
negatively curved edges and scores each by the mean curvature gain it
brings to the edges of those triangles. During training, every
propagation step drops and adds edges by sampling without replacement
from softmax distributions that mix the curvature scores with embedding
distances.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .curvature import CurvatureVector, jlc_all, jlc_for_edges
from .graph import Graph, RewiredView, common_neighbors, materialize


class RewiringConfigError(ValueError):
    pass


class BankExhaustedWarning(UserWarning):
    """More additions were requested than the bank holds."""


@dataclass(frozen=True)
class RewiringConfig:
    p_A: float = 0.0
    p_D: float = 0.0
    alpha: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("p_A", "p_D", "alpha"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise RewiringConfigError(f"{name} must lie in [0, 1], got {v}")

    @property
    def is_null(self) -> bool:
        return self.p_A == 0.0 and self.p_D == 0.0


@dataclass
class EdgeBank:
    candidates: np.ndarray
    source_graph_fingerprint: str
    sigma: np.ndarray = field(default_factory=lambda: np.zeros(0))
    phi_a: np.ndarray = field(default_factory=lambda: np.zeros(0))
    phi_d: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __len__(self) -> int:
        return int(self.candidates.shape[0])

    def to_json(self) -> str:
        return json.dumps(
            {
                "candidates": self.candidates.tolist(),
                "sigma": self.sigma.tolist(),
                "phi_a": self.phi_a.tolist(),
                "phi_d": self.phi_d.tolist(),
                "fingerprint": self.source_graph_fingerprint,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "EdgeBank":
        d = json.loads(text)
        return cls(
            candidates=np.asarray(d["candidates"], dtype=np.int64).reshape(-1, 2),
            source_graph_fingerprint=d["fingerprint"],
            sigma=np.asarray(d["sigma"], dtype=np.float64),
            phi_a=np.asarray(d["phi_a"], dtype=np.float64),
            phi_d=np.asarray(d["phi_d"], dtype=np.float64),
        )


def minmax_normalize(x: np.ndarray) -> np.ndarray:
    """Scale into [0, 1]; a constant (or empty) vector maps to 0.5."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        return x.copy()
    lo, hi = x.min(), x.max()
    if hi - lo <= 0.0:
        return np.full_like(x, 0.5)
    return (x - lo) / (hi - lo)


def softmax(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(z - z.max())
    return e / e.sum()


def _target_bank_size(p_A: float, m: int) -> int:
    # round() first so 2 * (2/7) * 7 counts as 4, not 4 + 1 ulp
    return int(math.ceil(round(2.0 * p_A * m, 9)))


def bank_edges(g: Graph, jlc: CurvatureVector, p_A: float) -> EdgeBank:
    """Collect non-edges closing triangles around edges in ascending curvature order."""
    if not 0.0 <= p_A <= 1.0:
        raise RewiringConfigError(f"p_A must lie in [0, 1], got {p_A}")
    if jlc.graph_fingerprint != g.fingerprint:
        raise ValueError("curvature vector was computed on a different graph")
    target = _target_bank_size(p_A, g.m)
    found: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    # stable sort keeps canonical edge order among equal curvatures
    order = np.argsort(jlc.values, kind="stable")
    for rho in order:
        if len(found) >= target:
            break
        a, b = (int(x) for x in g.edges[rho])
        for anchor, other in ((a, b), (b, a)):
            for u in g.neighbors(anchor).tolist():
                if u == other or g.has_edge(u, other):
                    continue
                pair = (u, other) if u < other else (other, u)
                if pair not in seen:
                    seen.add(pair)
                    found.append(pair)
    cands = np.asarray(found, dtype=np.int64).reshape(-1, 2)
    return EdgeBank(candidates=cands, source_graph_fingerprint=g.fingerprint)


def improvement_scores(g: Graph, candidates: np.ndarray, jlc: CurvatureVector) -> np.ndarray:
    """Mean curvature gain on the triangle edges each candidate would close.

    The new curvatures are read off the graph with the candidate actually
    inserted, not patched from the old degrees.
    """
    sigma = np.zeros(candidates.shape[0])
    for m, (r, s) in enumerate(candidates.tolist()):
        tri = common_neighbors(g, r, s)
        if tri.size == 0:
            raise AssertionError(f"candidate ({r}, {s}) closes no triangle")
        affected = np.concatenate([np.stack([tri, np.full_like(tri, r)], 1), np.stack([tri, np.full_like(tri, s)], 1)])
        affected = np.sort(affected, axis=1)
        before = jlc.values[g.edge_indices(affected)]
        augmented = materialize(RewiredView(g, np.zeros(0, dtype=np.int64), np.array([[r, s]])))
        sigma[m] = float(np.mean(jlc_for_edges(augmented, affected) - before))
    return sigma


def drop_scores(jlc: CurvatureVector) -> np.ndarray:
    """Curvature part of the drop distribution: most negative curvature scores 1."""
    return minmax_normalize(-jlc.values)


def scores_improvement(g: Graph, bank: EdgeBank, jlc: CurvatureVector) -> tuple[np.ndarray, np.ndarray]:
    """Fill ``bank.sigma``/``phi_a``/``phi_d`` and return ``(phi_d, phi_a)``."""
    if bank.source_graph_fingerprint != g.fingerprint:
        raise ValueError("edge bank was built on a different graph")
    bank.sigma = improvement_scores(g, bank.candidates, jlc)
    bank.phi_d = drop_scores(jlc)
    bank.phi_a = minmax_normalize(bank.sigma)
    return bank.phi_d, bank.phi_a


def build_edge_bank(g: Graph, p_A: float, jlc: CurvatureVector | None = None) -> EdgeBank:
    jlc = jlc_all(g) if jlc is None else jlc
    bank = bank_edges(g, jlc, p_A)
    scores_improvement(g, bank, jlc)
    return bank


def sample_without_replacement(scores: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """``k`` distinct indices drawn from ``softmax(scores)`` (Gumbel top-k); sorted."""
    scores = np.asarray(scores, dtype=np.float64)
    n = scores.shape[0]
    if k > n:
        raise ValueError(f"cannot draw {k} items from {n} without replacement")
    if k <= 0:
        return np.zeros(0, dtype=np.int64)
    keys = scores + rng.gumbel(size=n)
    if k == n:
        return np.arange(n, dtype=np.int64)
    top = np.argpartition(-keys, k - 1)[:k]
    return np.sort(top).astype(np.int64)


def sequential_softmax_sample(scores: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Reference sampler: draw one index at a time and renormalise."""
    scores = np.asarray(scores, dtype=np.float64)
    alive = np.ones(scores.shape[0], dtype=bool)
    out = []
    for _ in range(k):
        idx = np.flatnonzero(alive)
        p = softmax(scores[idx])
        pick = idx[rng.choice(idx.shape[0], p=p)]
        out.append(pick)
        alive[pick] = False
    return np.sort(np.asarray(out, dtype=np.int64))


def _pair_distances(H: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    if pairs.shape[0] == 0:
        return np.zeros(0)
    diff = H[pairs[:, 0]] - H[pairs[:, 1]]
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def sjlr_epoch_view(
    g: Graph, bank: EdgeBank, H: np.ndarray, cfg: RewiringConfig, rng: np.random.Generator
) -> RewiredView:
    """Sample one rewired view of ``g`` from the current embeddings ``H``.

    Large embedding distance raises an edge's drop probability and lowers a
    candidate's add probability; ``alpha`` weights the curvature scores
    against these distances.
    """
    if bank.source_graph_fingerprint != g.fingerprint:
        raise ValueError("edge bank was built on a different graph")
    H = np.asarray(H, dtype=np.float64).reshape(g.n, -1)
    k_drop = round(cfg.p_D * g.m)
    k_add = round(cfg.p_A * g.m)
    dropped = np.zeros(0, dtype=np.int64)
    added = np.zeros((0, 2), dtype=np.int64)
    if k_drop > 0:
        d_n = minmax_normalize(_pair_distances(H, g.edges))
        dropped = sample_without_replacement(cfg.alpha * bank.phi_d + (1.0 - cfg.alpha) * d_n, k_drop, rng)
    if k_add > 0 and len(bank):
        if k_add > len(bank):
            warnings.warn(
                f"requested {k_add} additions but the bank holds {len(bank)}; adding all", BankExhaustedWarning
            )
            k_add = len(bank)
        a_n = minmax_normalize(_pair_distances(H, bank.candidates))
        picked = sample_without_replacement(cfg.alpha * bank.phi_a - (1.0 - cfg.alpha) * a_n, k_add, rng)
        added = bank.candidates[picked]
    return RewiredView(g, dropped, added)
