"""Exact integer transportation via successive shortest paths."""

from __future__ import annotations

import numpy as np


def min_cost_transport(supply: np.ndarray, demand: np.ndarray, cost: np.ndarray) -> tuple[int, np.ndarray]:
    """Solve the balanced transportation problem with integer data.

    Parameters
    ----------
    supply : (m,) int array
    demand : (n,) int array, ``demand.sum() == supply.sum()``
    cost : (m, n) int array of arc costs (uncapacitated arcs)

    Returns
    -------
    total_cost, flow
        ``flow`` is an ``(m, n)`` integer plan.
    """
    supply = np.asarray(supply, dtype=np.int64)
    demand = np.asarray(demand, dtype=np.int64)
    cost = np.asarray(cost, dtype=np.int64)
    m, n = cost.shape
    if supply.sum() != demand.sum():
        raise ValueError("supply and demand must balance")
    # nodes: 0 = super source, 1..m sources, m+1..m+n sinks, m+n+1 super sink
    N = m + n + 2
    S, T = 0, N - 1
    heads: list[list[int]] = [[] for _ in range(N)]
    to: list[int] = []
    cap: list[int] = []
    wt: list[int] = []

    def arc(a: int, b: int, c: int, w: int) -> None:
        heads[a].append(len(to))
        to.append(b)
        cap.append(c)
        wt.append(w)
        heads[b].append(len(to))
        to.append(a)
        cap.append(0)
        wt.append(-w)

    big = int(supply.sum())
    for i in range(m):
        arc(S, 1 + i, int(supply[i]), 0)
    for i in range(m):
        for j in range(n):
            arc(1 + i, 1 + m + j, big, int(cost[i, j]))
    for j in range(n):
        arc(1 + m + j, T, int(demand[j]), 0)

    flow_total = 0
    cost_total = 0
    while flow_total < big:
        # Bellman-Ford on the residual graph (costs can be negative on reverse arcs)
        dist = [None] * N
        prev = [-1] * N
        dist[S] = 0
        for _ in range(N - 1):
            changed = False
            for a in range(N):
                da = dist[a]
                if da is None:
                    continue
                for e in heads[a]:
                    if cap[e] > 0:
                        b = to[e]
                        nd = da + wt[e]
                        if dist[b] is None or nd < dist[b]:
                            dist[b] = nd
                            prev[b] = e
                            changed = True
            if not changed:
                break
        if dist[T] is None:
            raise RuntimeError("transport problem is infeasible")
        push = big - flow_total
        b = T
        while b != S:
            e = prev[b]
            push = min(push, cap[e])
            b = to[e ^ 1]
        b = T
        while b != S:
            e = prev[b]
            cap[e] -= push
            cap[e ^ 1] += push
            b = to[e ^ 1]
        flow_total += push
        cost_total += push * dist[T]

    plan = np.zeros((m, n), dtype=np.int64)
    for i in range(m):
        for e in heads[1 + i]:
            b = to[e]
            if 1 + m <= b < 1 + m + n and e % 2 == 0:
                plan[i, b - 1 - m] = cap[e ^ 1]
    return cost_total, plan
