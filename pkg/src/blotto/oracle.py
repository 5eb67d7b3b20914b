"""Brute-force ground truth for tiny games.

Everything here enumerates the full strategy space, so it is only usable
when ``C(n+k-1, k-1)`` is small. Tests use it to check the DP-based engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from blotto.game import Allocation

MAX_COMPOSITIONS = 10**6


class OracleTooLarge(ValueError):
    pass


def composition_count(n: int, k: int) -> int:
    return math.comb(n + k - 1, k - 1)


@dataclass(frozen=True)
class CompositionSet:
    n: int
    k: int
    items: np.ndarray  # (count, k), lexicographic

    def __len__(self) -> int:
        return len(self.items)

    def index(self, comp: Sequence[int]) -> int:
        hits = np.flatnonzero((self.items == np.asarray(comp)).all(axis=1))
        if len(hits) == 0:
            raise KeyError(tuple(comp))
        return int(hits[0])


def _compositions(n: int, k: int):
    if k == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


def enumerate_compositions(n: int, k: int) -> CompositionSet:
    if k < 1 or n < 0:
        raise ValueError("need k >= 1 and n >= 0")
    count = composition_count(n, k)
    if count > MAX_COMPOSITIONS:
        raise OracleTooLarge(f"{count} compositions exceeds the enumeration limit {MAX_COMPOSITIONS}")
    items = np.array(list(_compositions(n, k)), dtype=np.int64).reshape(count, k)
    return CompositionSet(n, k, items)


def _entries(loss) -> np.ndarray:
    return np.asarray(getattr(loss, "entries", loss), dtype=float)


def composition_losses(loss, comps: CompositionSet) -> np.ndarray:
    """``sum_j L(j, s_j)`` for every composition, summed left to right."""
    entries = _entries(loss)
    total = np.zeros(len(comps))
    for j in range(comps.k):
        total = total + entries[j, comps.items[:, j]]
    return total


def explicit_log_weights(loss, beta: float, comps: CompositionSet | None = None) -> np.ndarray:
    entries = _entries(loss)
    if comps is None:
        comps = enumerate_compositions(entries.shape[1] - 1, entries.shape[0])
    return composition_losses(entries, comps) * math.log(beta)


def explicit_distribution(loss, beta: float) -> tuple[CompositionSet, np.ndarray]:
    """MWU distribution over every composition, ``P(s) ~ beta ** sum_j L(j, s_j)``."""
    entries = _entries(loss)
    comps = enumerate_compositions(entries.shape[1] - 1, entries.shape[0])
    logw = explicit_log_weights(entries, beta, comps)
    return comps, np.exp(logw - logsumexp(logw))


def conditional_marginal(comps: CompositionSet, probs: np.ndarray, battle: int, fixed: dict[int, int]) -> np.ndarray:
    """Distribution of ``s[battle]`` given the amounts in ``fixed`` (zero-based battles)."""
    mask = np.ones(len(comps), dtype=bool)
    for j, amount in fixed.items():
        mask &= comps.items[:, j] == amount
    p = probs[mask]
    out = np.bincount(comps.items[mask, battle], weights=p, minlength=comps.n + 1)
    return out / p.sum()


def exhaustive_best_response(loss, n: int | None = None) -> tuple[float, Allocation]:
    entries = _entries(loss)
    if n is None:
        n = entries.shape[1] - 1
    comps = enumerate_compositions(n, entries.shape[0])
    totals = composition_losses(entries, comps)
    best = int(np.argmin(totals))  # first minimum == lexicographically first
    return float(totals[best]), Allocation(tuple(comps.items[best].tolist()), getattr(loss, "owner", 1))


def empirical_distribution(comps: CompositionSet, draws: np.ndarray) -> np.ndarray:
    """Frequency of each composition among ``draws`` (rows are allocations)."""
    # Mixed-radix code of each row; compositions are unique under it.
    radix = comps.n + 1
    weights = radix ** np.arange(comps.k - 1, -1, -1, dtype=np.int64)
    codes = comps.items @ weights
    lookup = {int(c): i for i, c in enumerate(codes)}
    counts = np.zeros(len(comps))
    uniq, cnt = np.unique(np.asarray(draws) @ weights, return_counts=True)
    for code, c in zip(uniq, cnt):
        counts[lookup[int(code)]] += c
    return counts / counts.sum()


def tv_distance(p: Sequence[float], q: Sequence[float]) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    for v in (p, q):
        if abs(v.sum() - 1.0) > 1e-9:
            raise ValueError("inputs must be probability vectors")
    return 0.5 * float(np.abs(p - q).sum())


def brute_force_regret(loss_rows: Sequence[np.ndarray], played: Sequence[Sequence[int]], n: int) -> float:
    """Regret from a per-round list of loss matrices and the player's moves."""
    k = len(played[0])
    comps = enumerate_compositions(n, k)
    rounds = len(played)
    incurred = sum(float(sum(rows[j, s[j]] for j in range(k))) for rows, s in zip(loss_rows, played))
    hindsight = np.zeros(len(comps))
    for rows in loss_rows:
        hindsight += composition_losses(rows, comps)
    return (incurred - hindsight.min()) / rounds


def pairwise_expected_loss(table1: np.ndarray, traj1: np.ndarray, traj2: np.ndarray) -> float:
    """Naive ``(1/T^2) sum_s sum_t loss1(x_s, y_t)`` over recorded rounds."""
    k = table1.shape[0]
    total = 0.0
    for x in traj1:
        for y in traj2:
            total += float(table1[np.arange(k), x, y].sum())
    return total / (len(traj1) * len(traj2))


def brute_force_gaps(table1: np.ndarray, table2: np.ndarray, traj1: np.ndarray, traj2: np.ndarray, n1: int, n2: int) -> tuple[float, float]:
    """Exploitability gaps of the empirical average strategies, computed over
    whole allocations (no per-battle factorisation)."""
    k = table1.shape[0]
    c1 = enumerate_compositions(n1, k).items
    c2 = enumerate_compositions(n2, k).items
    idx = np.arange(k)
    # Loss of every pure strategy of player 1 against every recorded y, and vice versa.
    vs_y = np.array([[table1[idx, x, y].sum() for y in traj2] for x in c1]).mean(axis=1)
    vs_x = np.array([[table2[idx, y, x].sum() for x in traj1] for y in c2]).mean(axis=1)
    value1 = pairwise_expected_loss(table1, traj1, traj2)
    value2 = pairwise_expected_loss(table2, traj2, traj1)
    return value1 - vs_y.min(), value2 - vs_x.min()

