"""Synthetic generators, dataset files, homophily and train/val/test splits."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .graph import Graph, GraphInputError, build_graph, is_connected, largest_connected_component, read_edge_list


@dataclass(frozen=True)
class Dataset:
    graph: Graph
    X: np.ndarray
    y: np.ndarray
    name: str = "dataset"

    def __post_init__(self) -> None:
        if self.X.shape[0] != self.graph.n or self.y.shape[0] != self.graph.n:
            raise GraphInputError(
                f"{self.name}: X has {self.X.shape[0]} rows, y has {self.y.shape[0]}, graph has {self.graph.n} nodes"
            )

    @property
    def num_classes(self) -> int:
        return int(self.y.max()) + 1 if self.y.size else 0


@dataclass(frozen=True)
class Splits:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    scheme: str = "fractional"

    def __post_init__(self) -> None:
        parts = [set(self.train.tolist()), set(self.val.tolist()), set(self.test.tolist())]
        if parts[0] & parts[1] or parts[0] & parts[2] or parts[1] & parts[2]:
            raise ValueError("train/val/test splits overlap")

    def to_json(self) -> str:
        return json.dumps(
            {"scheme": self.scheme, "train": self.train.tolist(), "val": self.val.tolist(), "test": self.test.tolist()}
        )

    @classmethod
    def from_json(cls, text: str) -> "Splits":
        d = json.loads(text)
        return cls(
            train=np.asarray(d["train"], dtype=np.int64),
            val=np.asarray(d["val"], dtype=np.int64),
            test=np.asarray(d["test"], dtype=np.int64),
            scheme=d.get("scheme", "fractional"),
        )


def _check_prob(name: str, p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")


def _sample_pairs(n: int, prob: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.shape[0]) < prob[iu, ju] if prob.ndim == 2 else rng.random(iu.shape[0]) < prob
    return np.stack([iu[keep], ju[keep]], axis=1)


def gen_erdos_renyi(n: int, p: float, rng: np.random.Generator) -> Graph:
    _check_prob("p", p)
    return build_graph(_sample_pairs(n, np.asarray(p), rng), n)


def gen_sbm(
    sizes: Sequence[int],
    p_in: float,
    p_out: float,
    rng: np.random.Generator,
    feature_sigma: float | None = None,
    n_features: int | None = None,
) -> Dataset:
    """Stochastic block model; block index is the node label.

    With ``feature_sigma`` set, node features are Gaussian around class
    means spaced one unit apart (``e_c / sqrt(2)``), padded with pure-noise
    dimensions up to ``n_features``.
    """
    _check_prob("p_in", p_in)
    _check_prob("p_out", p_out)
    y = np.repeat(np.arange(len(sizes)), sizes)
    n = int(y.shape[0])
    prob = np.where(y[:, None] == y[None, :], p_in, p_out)
    g = build_graph(_sample_pairs(n, prob, rng), n)
    C = len(sizes)
    if feature_sigma is None:
        X = np.eye(C)[y]
    else:
        F = max(C, n_features or C)
        means = np.zeros((C, F))
        means[np.arange(C), np.arange(C)] = 1.0 / np.sqrt(2.0)
        X = means[y] + feature_sigma * rng.standard_normal((n, F))
    return Dataset(graph=g, X=X, y=y, name=f"sbm{list(sizes)}")


def gen_binary_tree(depth: int) -> Graph:
    """Complete binary tree with BFS numbering: children of ``v`` are ``2v+1, 2v+2``."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    n = 2 ** (depth + 1) - 1
    child = np.arange(1, n)
    return build_graph(np.stack([(child - 1) // 2, child], axis=1), n)


def complete_graph(n: int) -> Graph:
    iu, ju = np.triu_indices(n, k=1)
    return build_graph(np.stack([iu, ju], axis=1), n)


def cycle_graph(n: int) -> Graph:
    a = np.arange(n)
    return build_graph(np.stack([a, (a + 1) % n], axis=1), n)


def path_graph(n: int) -> Graph:
    a = np.arange(n - 1)
    return build_graph(np.stack([a, a + 1], axis=1), n)


def star_graph(leaves: int) -> Graph:
    return build_graph([(0, k) for k in range(1, leaves + 1)], leaves + 1)


def two_triangle_bridge() -> Graph:
    """Triangles {0,1,2} and {3,4,5} joined by the bridge (2, 3)."""
    return build_graph([(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)], 6)


def small_graph_corpus(count: int = 200, max_n: int = 12, seed: int = 0) -> Iterator[tuple[str, Graph]]:
    """Connected test graphs: named families first, then random ones.

    Random graphs are sampled as Erdos-Renyi with a spread of densities,
    random trees, and random graphs grown around a spanning tree, so
    bipartite, sparse and dense cases are all represented.
    """
    rng = np.random.default_rng(seed)
    named: list[tuple[str, Graph]] = []
    for k in range(3, max_n + 1):
        named.append((f"K{k}", complete_graph(k)))
        named.append((f"C{k}", cycle_graph(k)))
        named.append((f"P{k}", path_graph(k)))
        named.append((f"S{k - 1}", star_graph(k - 1)))
    named.append(("K2", complete_graph(2)))
    named.append(("two_triangle_bridge", two_triangle_bridge()))
    named.append(("binary_tree_2", gen_binary_tree(2)))
    produced = 0
    for item in named:
        if produced >= count:
            return
        produced += 1
        yield item
    k = 0
    while produced < count:
        n = int(rng.integers(4, max_n + 1))
        kind = k % 3
        if kind == 0:
            g = gen_erdos_renyi(n, float(rng.uniform(0.2, 0.9)), rng)
        else:
            parents = [int(rng.integers(0, v)) for v in range(1, n)]
            pairs = [(p, v) for v, p in enumerate(parents, start=1)]
            if kind == 2:
                extra = int(rng.integers(1, n))
                pairs += [tuple(rng.choice(n, size=2, replace=False)) for _ in range(extra)]
            g = build_graph(pairs, n)
        k += 1
        if not is_connected(g) or g.m == 0:
            continue
        produced += 1
        yield f"random_{k}", g


def homophily(g: Graph, y: np.ndarray) -> float:
    """Node homophily: mean same-label neighbour fraction over non-isolated nodes."""
    y = np.asarray(y)
    d = g.degrees
    if not (d > 0).any():
        raise ValueError("homophily is undefined when every node is isolated")
    same = np.zeros(g.n)
    e = g.edges
    eq = (y[e[:, 0]] == y[e[:, 1]]).astype(np.float64)
    np.add.at(same, e[:, 0], eq)
    np.add.at(same, e[:, 1], eq)
    mask = d > 0
    return float(np.mean(same[mask] / d[mask]))


def _read_labels(path: Path) -> np.ndarray:
    labels = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s:
                continue
            try:
                labels.append(int(s))
            except ValueError:
                raise GraphInputError(f"{path}:{lineno}: label {s!r} is not an integer") from None
    y = np.asarray(labels, dtype=np.int64)
    present = np.unique(y)
    if y.size and not np.array_equal(present, np.arange(present.shape[0])):
        missing = sorted(set(range(int(present.max()) + 1)) - set(present.tolist()))
        raise GraphInputError(f"{path}: labels are not contiguous from 0 (missing {missing})")
    return y


def _read_features(path: Path) -> np.ndarray:
    rows = []
    width = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s:
                continue
            try:
                row = [float(x) for x in s.split(",")]
            except ValueError:
                raise GraphInputError(f"{path}:{lineno}: non-numeric feature") from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise GraphInputError(f"{path}:{lineno}: expected {width} columns, got {len(row)}")
            rows.append(row)
    return np.asarray(rows, dtype=np.float64).reshape(len(rows), width or 0)


def load_dataset(directory: str | Path, name: str | None = None) -> Dataset:
    """Load ``edges.txt``, ``features.csv`` and ``labels.csv``, keeping the largest component."""
    d = Path(directory)
    X = _read_features(d / "features.csv")
    y = _read_labels(d / "labels.csv")
    if X.shape[0] != y.shape[0]:
        raise GraphInputError(f"{d}: features.csv has {X.shape[0]} rows but labels.csv has {y.shape[0]}")
    g = read_edge_list(d / "edges.txt", n=y.shape[0])
    sub, node_map = largest_connected_component(g)
    old = np.fromiter(node_map.keys(), dtype=np.int64, count=len(node_map))
    ys = y[old]
    _, ys = np.unique(ys, return_inverse=True)
    return Dataset(graph=sub, X=X[old], y=ys.astype(np.int64), name=name or d.name)


def save_dataset(ds: Dataset, directory: str | Path) -> None:
    from .graph import write_edge_list

    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_edge_list(ds.graph, d / "edges.txt")
    with open(d / "features.csv", "w", encoding="utf-8") as fh:
        for row in ds.X:
            fh.write(",".join(format(float(v), ".17g") for v in row) + "\n")
    with open(d / "labels.csv", "w", encoding="utf-8") as fh:
        fh.write("\n".join(str(int(v)) for v in ds.y) + "\n")


def make_splits(
    y: np.ndarray,
    scheme: str,
    rng: np.random.Generator,
    per_class: int = 20,
    dev_size: int = 1500,
) -> Splits:
    """Random splits.

    ``fractional`` shuffles nodes into 60/20/20. ``per-class`` draws
    ``per_class`` training nodes per class and fills a development set of
    ``dev_size`` nodes with validation nodes; everything else is test.
    When the graph is too small for ``dev_size``, the development set is
    capped at 80% of the nodes.
    """
    y = np.asarray(y)
    n = y.shape[0]
    if scheme == "fractional":
        perm = rng.permutation(n)
        n_tr, n_va = int(0.6 * n), int(0.2 * n)
        return Splits(np.sort(perm[:n_tr]), np.sort(perm[n_tr : n_tr + n_va]), np.sort(perm[n_tr + n_va :]), scheme)
    if scheme == "per-class":
        train = []
        for c in np.unique(y):
            members = np.flatnonzero(y == c)
            if members.shape[0] < per_class:
                raise ValueError(f"class {c} has {members.shape[0]} nodes, fewer than {per_class}")
            train.append(rng.choice(members, size=per_class, replace=False))
        train_idx = np.concatenate(train)
        rest = np.setdiff1d(np.arange(n), train_idx)
        rest = rng.permutation(rest)
        dev = min(dev_size, int(0.8 * n))
        n_val = max(dev - train_idx.shape[0], 0)
        return Splits(np.sort(train_idx), np.sort(rest[:n_val]), np.sort(rest[n_val:]), scheme)
    raise ValueError(f"unknown split scheme {scheme!r}")
