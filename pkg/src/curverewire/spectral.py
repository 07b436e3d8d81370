"""Normalized-Laplacian spectra, random-walk mixing and Cheeger diagnostics.

All logarithms are natural, matching the ``exp(-s * lambda')`` decay of
the walk-to-stationarity bound.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .graph import DisconnectedGraphError, Graph, diameter, is_bipartite, is_connected

DENSE_LIMIT = 4000
EXACT_CHEEGER_LIMIT = 20


class EigensolverError(RuntimeError):
    pass


class BipartiteWalkWarning(UserWarning):
    """The non-lazy walk on a bipartite graph never mixes."""


@dataclass(frozen=True)
class SpectralReport:
    lambda2: float
    lambdaN: float
    lambda_prime: float
    cheeger_lower: float
    cheeger_upper: float
    mixing_steps: float
    epsilon: float
    dmax: int
    dmin: int
    lazy: bool

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class CheegerResult:
    h: float
    witness: tuple[int, ...]
    method: str  # "exact" or "bounded-only"
    lower: float = float("nan")
    upper: float = float("nan")

    def to_dict(self) -> dict:
        return {"h": self.h, "witness": sorted(self.witness), "method": self.method, "lower": self.lower, "upper": self.upper}


def _require_no_isolates(g: Graph) -> None:
    if g.n == 0:
        raise DisconnectedGraphError("empty graph")
    if (g.degrees == 0).any():
        iso = int(np.flatnonzero(g.degrees == 0)[0])
        raise DisconnectedGraphError(
            f"node {iso} is isolated; take largest_connected_component(g) first"
        )


def _sym_normalized_adjacency(g: Graph) -> sp.csr_matrix:
    _require_no_isolates(g)
    inv_sqrt = 1.0 / np.sqrt(g.degrees.astype(np.float64))
    Dm = sp.diags(inv_sqrt)
    return (Dm @ g.adjacency_matrix @ Dm).tocsr()


def normalized_laplacian(g: Graph) -> np.ndarray:
    """Dense ``I - D^{-1/2} A D^{-1/2}``."""
    S = _sym_normalized_adjacency(g).toarray()
    return np.eye(g.n) - S


def lazy_normalized_laplacian(g: Graph) -> np.ndarray:
    """Normalized Laplacian of the graph with a self-loop of weight ``d_i`` per node (``A + D``)."""
    _require_no_isolates(g)
    d = g.degrees.astype(np.float64)
    W = g.adjacency_matrix.toarray() + np.diag(d)
    dd = 2.0 * d
    inv = 1.0 / np.sqrt(dd)
    return np.eye(g.n) - inv[:, None] * W * inv[None, :]


def laplacian_spectrum(g: Graph) -> np.ndarray:
    return scipy.linalg.eigh(normalized_laplacian(g), eigvals_only=True)


def spectral_extremes(g: Graph, tol: float = 1e-10) -> tuple[float, float]:
    """Second-smallest and largest eigenvalue of the normalized Laplacian."""
    if not is_connected(g):
        raise DisconnectedGraphError("spectral gap requires a connected graph")
    if g.n == 1:
        return 0.0, 0.0
    if g.n <= DENSE_LIMIT:
        ev = laplacian_spectrum(g)
        lam1, lam2, lamN = ev[0], ev[1], ev[-1]
    else:
        # work with S = D^{-1/2} A D^{-1/2}: eigenvalues 1 - lambda
        S = _sym_normalized_adjacency(g)
        maxiter = 20 * g.n
        try:
            top = spla.eigsh(S, k=2, which="LA", tol=tol, maxiter=maxiter, v0=np.ones(g.n))[0]
            bottom = spla.eigsh(S, k=1, which="SA", tol=tol, maxiter=maxiter, v0=np.ones(g.n))[0]
        except spla.ArpackNoConvergence as exc:
            raise EigensolverError(f"Lanczos did not converge within {maxiter} iterations") from exc
        top = np.sort(top)[::-1]
        lam1, lam2, lamN = 1.0 - top[0], 1.0 - top[1], 1.0 - bottom[0]
    if abs(lam1) > 1e-8:
        raise EigensolverError(f"smallest eigenvalue {lam1:.3e} is not zero")
    return float(max(lam2, 0.0)), float(min(lamN, 2.0))


def lambda_prime(lambda2: float, lambdaN: float) -> float:
    """Decay rate of the walk: ``lambda2`` if ``1 - lambda2 >= lambdaN - 1`` else ``2 - lambdaN``."""
    return lambda2 if 1.0 - lambda2 >= lambdaN - 1.0 else 2.0 - lambdaN


def cheeger_ratio(g: Graph, subset) -> float:
    """``|boundary(S)| / min(vol(S), vol(V \\ S))``."""
    mask = np.zeros(g.n, dtype=bool)
    mask[list(subset)] = True
    if not mask.any() or mask.all():
        raise ValueError("subset must be nonempty and proper")
    cut = int(np.count_nonzero(mask[g.edges[:, 0]] != mask[g.edges[:, 1]]))
    vol_s = int(g.degrees[mask].sum())
    vol_c = int(g.degrees[~mask].sum())
    return cut / min(vol_s, vol_c)


def cheeger_constant_exact(g: Graph, chunk: int = 1 << 16) -> CheegerResult:
    """Exhaustive minimum over subsets containing node 0 (its complement covers the rest)."""
    n = g.n
    if n > EXACT_CHEEGER_LIMIT:
        raise ValueError(f"exact Cheeger constant is limited to n <= {EXACT_CHEEGER_LIMIT}; use cheeger_bounds")
    if not is_connected(g) or n < 2:
        raise DisconnectedGraphError("Cheeger constant needs a connected graph with at least two nodes")
    deg = g.degrees.astype(np.int64)
    vol = int(deg.sum())
    u, v = g.edges[:, 0], g.edges[:, 1]
    shifts = np.arange(1, n, dtype=np.int64)
    best_num, best_den, best_mask = None, None, None
    total = 1 << (n - 1)
    # masks over nodes 1..n-1; node 0 is always in S; skip the all-ones (S = V) mask
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        bits = np.ones((codes.shape[0], n), dtype=bool)
        bits[:, 1:] = ((codes[:, None] >> (shifts - 1)[None, :]) & 1).astype(bool)
        proper = ~bits.all(axis=1)
        bits, codes = bits[proper], codes[proper]
        if codes.size == 0:
            continue
        vol_s = bits.astype(np.int64) @ deg
        den = np.minimum(vol_s, vol - vol_s)
        cut = (bits[:, u] != bits[:, v]).sum(axis=1)
        ratio = cut / den
        k = int(np.argmin(ratio))
        c, d = int(cut[k]), int(den[k])
        # cross-multiplied so chunk winners compare exactly
        if best_num is None or c * best_den < best_num * d:
            best_num, best_den, best_mask = c, d, bits[k].copy()
    witness = tuple(int(i) for i in np.flatnonzero(best_mask))
    return CheegerResult(h=best_num / best_den, witness=witness, method="exact")


def cheeger_bounds(lambda2: float) -> tuple[float, float]:
    """Bounds on ``h`` from ``2h >= lambda2 >= h^2 / 2``."""
    if lambda2 < 0:
        raise ValueError("lambda2 must be non-negative")
    return lambda2 / 2.0, math.sqrt(2.0 * lambda2)


def cheeger_constant(g: Graph) -> CheegerResult:
    """Exact value when small enough, spectral bounds otherwise."""
    lam2, _ = spectral_extremes(g)
    lo, hi = cheeger_bounds(lam2)
    if g.n <= EXACT_CHEEGER_LIMIT:
        res = cheeger_constant_exact(g)
        return CheegerResult(res.h, res.witness, "exact", lo, hi)
    return CheegerResult(float("nan"), (), "bounded-only", lo, hi)


def stationary_distribution(g: Graph) -> np.ndarray:
    if not is_connected(g):
        raise DisconnectedGraphError("stationary distribution needs a connected graph")
    d = g.degrees.astype(np.float64)
    return d / d.sum()


def transition_matrix(g: Graph, lazy: bool = False) -> sp.csr_matrix:
    """``D^{-1} A``, or the lazy walk ``(I + D^{-1} A) / 2`` on ``A + D``."""
    _require_no_isolates(g)
    P = sp.diags(1.0 / g.degrees.astype(np.float64)) @ g.adjacency_matrix
    if lazy:
        P = 0.5 * (sp.identity(g.n, format="csr") + P)
    return P.tocsr()


def walk_distribution(g: Graph, f: np.ndarray, steps: int, lazy: bool = False) -> np.ndarray:
    PT = transition_matrix(g, lazy).T.tocsr()
    x = np.asarray(f, dtype=np.float64).copy()
    for _ in range(steps):
        x = PT @ x
    return x


@dataclass(frozen=True)
class WalkConvergence:
    distance: float
    bound: float
    lambda_prime: float
    bipartite_warning: bool


def walk_convergence(g: Graph, f: np.ndarray, s: int, lazy: bool = False) -> WalkConvergence:
    """l2 distance of ``f^T P^s`` from stationarity and the spectral bound on it."""
    f = np.asarray(f, dtype=np.float64)
    if (f < 0).any() or not math.isclose(f.sum(), 1.0, abs_tol=1e-9):
        raise ValueError("f must be a probability distribution")
    pi = stationary_distribution(g)
    lam2, lamN = spectral_extremes(g)
    if lazy:
        lam2, lamN = lam2 / 2.0, lamN / 2.0
    lp = lambda_prime(lam2, lamN)
    flag = False
    if not lazy and is_bipartite(g):
        flag = True
        warnings.warn("walk on a bipartite graph: lambda' = 0 and the bound is vacuous", BipartiteWalkWarning)
    # the lazy graph A + D has degrees 2d, so the degree ratio is unchanged
    ratio = math.sqrt(g.degrees.max()) / math.sqrt(g.degrees.min())
    x = walk_distribution(g, f, s, lazy)
    return WalkConvergence(
        distance=float(np.linalg.norm(x - pi)),
        bound=math.exp(-s * lp) * ratio,
        lambda_prime=lp,
        bipartite_warning=flag,
    )


def mixing_steps(lambda2: float, epsilon: float, dmax: int, dmin: int) -> float:
    """``(1 / lambda2) * ln(sqrt(dmax) / (epsilon * sqrt(dmin)))``."""
    if lambda2 <= 0:
        raise DisconnectedGraphError("mixing steps are undefined for lambda2 <= 0 (disconnected graph)")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return math.log(math.sqrt(dmax) / (epsilon * math.sqrt(dmin))) / lambda2


def graph_mixing_steps(g: Graph, epsilon: float) -> float:
    lam2, _ = spectral_extremes(g)
    return mixing_steps(lam2, epsilon, int(g.degrees.max()), int(g.degrees.min()))


def lambda2_diameter_bound(g: Graph) -> float:
    """Upper bound on lambda2 from the maximum degree and the diameter (needs diameter >= 4)."""
    di = diameter(g)
    if di < 4:
        raise ValueError(f"diameter {di} < 4; the bound does not apply")
    k = float(g.degrees.max())
    return 1.0 - 2.0 * math.sqrt(k - 1.0) / k * (1.0 - 2.0 / di) + 2.0 / di


@dataclass(frozen=True)
class MixingCheegerCheck:
    lhs: float
    rhs: float
    holds: bool
    steps: float
    exact: bool


def cheeger_mixing_check(g: Graph, epsilon: float) -> MixingCheegerCheck:
    """Check ``2h >= (1/s) ln(sqrt(dmax) / (eps sqrt(dmin)))`` with ``s`` the mixing steps.

    ``lhs`` is ``2h`` from exhaustive search when ``n <= 20``; larger graphs
    fall back to the conservative ``2 * (lambda2 / 2)``.
    """
    lam2, _ = spectral_extremes(g)
    dmax, dmin = int(g.degrees.max()), int(g.degrees.min())
    s = mixing_steps(lam2, epsilon, dmax, dmin)
    rhs = math.log(math.sqrt(dmax) / (epsilon * math.sqrt(dmin))) / s
    if g.n <= EXACT_CHEEGER_LIMIT:
        lhs, exact = 2.0 * cheeger_constant_exact(g).h, True
    else:
        lhs, exact = 2.0 * cheeger_bounds(lam2)[0], False
    return MixingCheegerCheck(lhs=lhs, rhs=rhs, holds=lhs >= rhs - 1e-9, steps=s, exact=exact)


def mixing_time_upper_bound(g: Graph, epsilon: float, h: float | None = None) -> float:
    """``(2 / h^2) (ln(1/eps) + ln(1/pi_min))`` for the walk on ``g``."""
    if h is None:
        h = cheeger_constant_exact(g).h
    if h <= 0:
        raise ValueError("Cheeger constant must be positive")
    pi_min = float(stationary_distribution(g).min())
    return 2.0 / h**2 * (math.log(1.0 / epsilon) + math.log(1.0 / pi_min))


def empirical_mixing_time(
    g: Graph, epsilon: float, starts=None, lazy: bool | None = None, max_steps: int = 100_000
) -> int:
    """First ``s`` at which every point-mass start is within ``epsilon`` (l2) of stationarity.

    Bipartite graphs use the lazy walk by default since the plain walk
    oscillates forever.
    """
    if lazy is None:
        lazy = is_bipartite(g)
    pi = stationary_distribution(g)
    if starts is None:
        starts = np.arange(g.n)
    starts = np.asarray(starts)
    X = np.zeros((g.n, starts.shape[0]))
    X[starts, np.arange(starts.shape[0])] = 1.0
    PT = transition_matrix(g, lazy).T.tocsr()
    for s in range(max_steps + 1):
        if np.linalg.norm(X - pi[:, None], axis=0).max() <= epsilon:
            return s
        X = PT @ X
    raise RuntimeError(f"walk did not mix within {max_steps} steps")


def binary_tree_decay(g: Graph, r: int, target: int | None = None) -> float:
    """``P^{r+1}(root, target)`` on a BFS-numbered complete binary tree.

    Defaults to the leftmost node at depth ``r + 1``.
    """
    if target is None:
        target = 2 ** (r + 1) - 1
    depth_of_target = int(math.floor(math.log2(target + 1)))
    if depth_of_target != r + 1 or target >= g.n:
        raise ValueError(f"node {target} is not at depth {r + 1} of this tree")
    f = np.zeros(g.n)
    f[0] = 1.0
    return float(walk_distribution(g, f, r + 1)[target])


def spectral_report(g: Graph, epsilon: float, lazy: bool = False) -> SpectralReport:
    lam2, lamN = spectral_extremes(g)
    if lazy:
        lam2, lamN = lam2 / 2.0, lamN / 2.0
    dmax, dmin = int(g.degrees.max()), int(g.degrees.min())
    lo, hi = cheeger_bounds(lam2)
    return SpectralReport(
        lambda2=lam2,
        lambdaN=lamN,
        lambda_prime=lambda_prime(lam2, lamN),
        cheeger_lower=lo,
        cheeger_upper=hi,
        mixing_steps=mixing_steps(lam2, epsilon, dmax, dmin),
        epsilon=epsilon,
        dmax=dmax,
        dmin=dmin,
        lazy=lazy,
    )
