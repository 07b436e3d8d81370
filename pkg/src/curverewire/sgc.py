"""Simple graph convolution: K propagation steps and one softmax layer.

Training is full-batch with Adam. When rewiring is enabled each
propagation step of each epoch runs on a freshly sampled view of the
graph; evaluation always propagates over the original graph.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .data import Splits
from .graph import Graph, RewiredView
from .rewiring import EdgeBank, RewiringConfig, build_edge_bank, sjlr_epoch_view

KERNELS = ("rw", "rw_lazy", "sym", "sym_selfloop")


class TrainingDivergedError(FloatingPointError):
    pass


class FingerprintMismatchError(RuntimeError):
    """The evaluation graph is not the graph the model was trained on."""


def _view_edges(view: RewiredView) -> np.ndarray:
    keep = np.ones(view.base.m, dtype=bool)
    keep[view.dropped] = False
    return np.concatenate([view.base.edges[keep], view.added])


def propagation_kernel(g: Graph | RewiredView, kernel: str = "rw", allow_isolated: bool = False) -> sp.csr_matrix:
    """Sparse propagation operator for ``H <- op @ H``.

    ``allow_isolated`` gives nodes without neighbours an identity row
    instead of failing; rewired training views can strand a node.
    """
    if kernel not in KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}; expected one of {KERNELS}")
    if isinstance(g, RewiredView):
        # skip building a full Graph: only the symmetric adjacency is needed
        n = g.base.n
        e = _view_edges(g)
        r = np.concatenate([e[:, 0], e[:, 1]])
        c = np.concatenate([e[:, 1], e[:, 0]])
        A = sp.csr_matrix((np.ones(r.shape[0]), (r, c)), shape=(n, n))
        d = np.bincount(r, minlength=n).astype(np.float64)
    else:
        n = g.n
        A = g.adjacency_matrix
        d = g.degrees.astype(np.float64)
    if kernel == "sym_selfloop":
        At = A + sp.identity(n, format="csr")
        inv = 1.0 / np.sqrt(d + 1.0)
        return (sp.diags(inv) @ At @ sp.diags(inv)).tocsr()
    iso = d == 0
    if iso.any():
        if not allow_isolated:
            raise ValueError(f"node {int(np.flatnonzero(iso)[0])} is isolated; kernel {kernel!r} needs degree >= 1")
        d = np.where(iso, 1.0, d)
        A = (A + sp.diags(iso.astype(np.float64))).tocsr()
    if kernel == "sym":
        inv = 1.0 / np.sqrt(d)
        return (sp.diags(inv) @ A @ sp.diags(inv)).tocsr()
    P = sp.diags(1.0 / d) @ A
    if kernel == "rw_lazy":
        P = 0.5 * (sp.identity(n, format="csr") + P)
    return P.tocsr()


def propagate(op, H: np.ndarray, steps: int, keep_intermediate: bool = False):
    """Apply ``op`` ``steps`` times; optionally return every ``H^(l)``."""
    out = [np.asarray(H, dtype=np.float64)]
    cur = out[0]
    for _ in range(steps):
        cur = op @ cur
        if keep_intermediate:
            out.append(cur)
    return out if keep_intermediate else cur


@dataclass
class SGCModel:
    K: int
    kernel: str
    W: np.ndarray
    bias: np.ndarray
    dropout_p: float = 0.0
    trained_epochs: int = 0
    seed: int = 0
    graph_fingerprint: str = ""

    def __post_init__(self) -> None:
        if self.K < 0:
            raise ValueError("K must be non-negative")
        if self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}")

    def logits(self, H: np.ndarray) -> np.ndarray:
        return H @ self.W + self.bias

    def save(self, path: str | Path) -> None:
        """JSON header line, then little-endian float64 ``W`` (row-major) and ``bias``."""
        header = {
            "K": self.K,
            "kernel": self.kernel,
            "n_features": int(self.W.shape[0]),
            "n_classes": int(self.W.shape[1]),
            "seed": self.seed,
            "dropout_p": self.dropout_p,
            "trained_epochs": self.trained_epochs,
            "graph_fingerprint": self.graph_fingerprint,
        }
        with open(path, "wb") as fh:
            fh.write(json.dumps(header).encode("utf-8") + b"\n")
            fh.write(np.ascontiguousarray(self.W, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(self.bias, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "SGCModel":
        with open(path, "rb") as fh:
            header = json.loads(fh.readline().decode("utf-8"))
            F, C = header["n_features"], header["n_classes"]
            W = np.frombuffer(fh.read(8 * F * C), dtype="<f8").reshape(F, C).copy()
            b = np.frombuffer(fh.read(8 * C), dtype="<f8").copy()
        return cls(
            K=header["K"], kernel=header["kernel"], W=W, bias=b, dropout_p=header["dropout_p"],
            trained_epochs=header["trained_epochs"], seed=header["seed"],
            graph_fingerprint=header["graph_fingerprint"],
        )


@dataclass(frozen=True)
class ModelConfig:
    K: int = 2
    kernel: str = "rw"
    dropout: float = 0.0


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.01
    wd: float = 5e-4
    epochs: int = 1000
    seed: int = 0
    rewiring: RewiringConfig | None = None
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self) -> None:
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")


@dataclass
class History:
    train_loss: list[float] = field(default_factory=list)
    train_acc: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    val_acc: list[float] = field(default_factory=list)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["epoch", "train_loss", "train_acc", "val_acc"])
            for e, row in enumerate(zip(self.train_loss, self.train_acc, self.val_acc), start=1):
                w.writerow([e] + [format(x, ".17g") for x in row])

    @classmethod
    def from_csv(cls, path: str | Path) -> "History":
        h = cls()
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                h.train_loss.append(float(row["train_loss"]))
                h.train_acc.append(float(row["train_acc"]))
                h.val_acc.append(float(row["val_acc"]))
        return h


def _log_softmax(Z: np.ndarray) -> np.ndarray:
    Z = Z - Z.max(axis=1, keepdims=True)
    return Z - np.log(np.exp(Z).sum(axis=1, keepdims=True))


def loss_and_grad(
    W: np.ndarray, b: np.ndarray, H: np.ndarray, y: np.ndarray, idx: np.ndarray, wd: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy on ``idx`` plus ``wd/2 * ||W||^2``, with its gradients."""
    Hs = H[idx]
    logp = _log_softmax(Hs @ W + b)
    n = idx.shape[0]
    loss = -logp[np.arange(n), y[idx]].mean() + 0.5 * wd * float(np.sum(W * W))
    err = np.exp(logp)
    err[np.arange(n), y[idx]] -= 1.0
    err /= n
    return float(loss), Hs.T @ err + wd * W, err.sum(axis=0)


def _accuracy(logits: np.ndarray, y: np.ndarray, idx: np.ndarray) -> float:
    if idx.shape[0] == 0:
        return float("nan")
    return float(np.mean(np.argmax(logits[idx], axis=1) == y[idx]))


class _Adam:
    def __init__(self, shapes, lr, beta1, beta2, eps):
        self.lr, self.b1, self.b2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.b1**self.t
        c2 = 1.0 - self.b2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def _streams(seed: int, rewiring: RewiringConfig | None):
    init_ss, drop_ss = np.random.SeedSequence(seed).spawn(2)
    rw_ss = np.random.SeedSequence([seed, rewiring.seed if rewiring else 0, 1])
    return np.random.default_rng(init_ss), np.random.default_rng(drop_ss), np.random.default_rng(rw_ss)


def train(
    g: Graph,
    X: np.ndarray,
    y: np.ndarray,
    splits: Splits,
    model_cfg: ModelConfig = ModelConfig(),
    train_cfg: TrainConfig = TrainConfig(),
    bank: EdgeBank | None = None,
) -> tuple[SGCModel, History]:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n, F = X.shape
    C = int(y.max()) + 1
    tr, va = splits.train, splits.val
    init_rng, drop_rng, rw_rng = _streams(train_cfg.seed, train_cfg.rewiring)
    fingerprint = g.fingerprint

    limit = np.sqrt(6.0 / (F + C))
    W = init_rng.uniform(-limit, limit, size=(F, C))
    b = np.zeros(C)
    model = SGCModel(
        K=model_cfg.K, kernel=model_cfg.kernel, W=W, bias=b, dropout_p=model_cfg.dropout,
        seed=train_cfg.seed, graph_fingerprint=fingerprint,
    )
    base_op = propagation_kernel(g, model_cfg.kernel)
    clean = propagate(base_op, X, model_cfg.K)

    rcfg = train_cfg.rewiring
    rewire = rcfg is not None and not rcfg.is_null
    if rewire and bank is None:
        bank = build_edge_bank(g, rcfg.p_A)

    opt = _Adam([W.shape, b.shape], train_cfg.lr, train_cfg.beta1, train_cfg.beta2, train_cfg.eps)
    hist = History()
    p = model_cfg.dropout
    for epoch in range(train_cfg.epochs):
        if p > 0:
            mask = drop_rng.random(X.shape) >= p
            Xd = X * mask / (1.0 - p)
        else:
            Xd = X
        if rewire:
            H = Xd
            for _ in range(model_cfg.K):
                view = sjlr_epoch_view(g, bank, H, rcfg, rw_rng)
                op = base_op if view.is_identity else propagation_kernel(view, model_cfg.kernel, allow_isolated=True)
                H = op @ H
        elif p > 0:
            H = propagate(base_op, Xd, model_cfg.K)
        else:
            H = clean
        loss, gW, gb = loss_and_grad(W, b, H, y, tr, train_cfg.wd)
        if not np.isfinite(loss):
            raise TrainingDivergedError(f"loss became {loss} at epoch {epoch + 1}; try a smaller learning rate")
        opt.step([W, b], [gW, gb])
        logits = clean @ W + b
        logp = _log_softmax(logits)
        hist.train_loss.append(loss)
        hist.train_acc.append(_accuracy(logits, y, tr))
        hist.val_loss.append(float(-logp[va, y[va]].mean()) if va.size else float("nan"))
        hist.val_acc.append(_accuracy(logits, y, va))
    model.trained_epochs = train_cfg.epochs
    return model, hist


def predict(model: SGCModel, g_original: Graph, X: np.ndarray) -> np.ndarray:
    if g_original.fingerprint != model.graph_fingerprint:
        raise FingerprintMismatchError(
            f"evaluation graph {g_original.fingerprint[:12]} != training graph {model.graph_fingerprint[:12]}"
        )
    H = propagate(propagation_kernel(g_original, model.kernel), X, model.K)
    return model.logits(H)


def evaluate(model: SGCModel, g_original: Graph, X: np.ndarray, y: np.ndarray, idx: np.ndarray) -> float:
    """Accuracy on ``idx`` using the untouched training graph, no dropout."""
    logits = predict(model, g_original, X)
    return _accuracy(logits, np.asarray(y), np.asarray(idx, dtype=np.int64))
