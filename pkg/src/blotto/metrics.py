"""Regret, best responses, equilibrium distance and run summaries."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, NamedTuple, Optional, Sequence

import numpy as np

from blotto import _kernels
from blotto.game import Allocation, GameSpec

if TYPE_CHECKING:
    from blotto.engine import EngineConfig


class Checkpoint(NamedTuple):
    round: int
    regret1: float
    regret2: float
    total_regret: float
    eq_distance: Optional[float] = None


@dataclass(frozen=True)
class MarginalProfile:
    """Per-battle distributions over soldier counts ``0..n``."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 2:
            raise ValueError("marginal profile must be a k x (n+1) matrix")
        if np.any(p < 0) or not np.allclose(p.sum(axis=1), 1.0, atol=1e-9, rtol=0):
            raise ValueError("each battle row must be a probability distribution")
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_histogram(cls, hist: np.ndarray) -> "MarginalProfile":
        hist = np.asarray(hist, dtype=float)
        return cls(hist / hist.sum(axis=1, keepdims=True))

    @classmethod
    def point_mass(cls, alloc: Allocation | Sequence[int], n: int) -> "MarginalProfile":
        amounts = alloc.amounts if isinstance(alloc, Allocation) else tuple(alloc)
        p = np.zeros((len(amounts), n + 1))
        p[np.arange(len(amounts)), amounts] = 1.0
        return cls(p)

    def mean(self) -> np.ndarray:
        return self.probs @ np.arange(self.probs.shape[1])


@dataclass(eq=False)
class RunRecord:
    """Everything recorded for one optimisation run.

    ``trajectory[i]`` holds player ``i+1``'s sampled allocation for every
    played round (warm-start rounds are not played and not recorded).
    """

    spec: GameSpec
    config: "EngineConfig"
    histograms: tuple[np.ndarray, np.ndarray]
    incurred: tuple[float, float]
    checkpoints: list[Checkpoint]
    rounds_played: int
    warm_rounds: int
    converged: bool
    trajectory: tuple[np.ndarray, np.ndarray]
    learner: Optional[int] = None
    elapsed: float = field(default=0.0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RunRecord):
            return NotImplemented
        return (
            self.spec == other.spec
            and self.config == other.config
            and all(np.array_equal(a, b) for a, b in zip(self.histograms, other.histograms))
            and all(np.array_equal(a, b) for a, b in zip(self.trajectory, other.trajectory))
            and self.incurred == other.incurred
            and self.checkpoints == other.checkpoints
            and self.rounds_played == other.rounds_played
            and self.warm_rounds == other.warm_rounds
            and self.converged == other.converged
            and self.learner == other.learner
        )

    def profile(self, player: int) -> MarginalProfile:
        return MarginalProfile.from_histogram(self.histograms[player - 1])

    def average_allocation(self, player: int) -> np.ndarray:
        return average_allocation(self, player)

    def average_loss(self, player: int) -> float:
        return self.incurred[player - 1] / self.rounds_played

    @property
    def final(self) -> Checkpoint:
        return self.checkpoints[-1]


def incurred_loss(spec: GameSpec, alloc1: Allocation | Sequence[int], alloc2: Allocation | Sequence[int]) -> tuple[float, float]:
    """Total normalised loss of each player for one pure-strategy round."""
    a = spec.validate(alloc1, 1).as_array()
    b = spec.validate(alloc2, 2).as_array()
    battles = np.arange(spec.k)
    loss1 = float(spec.loss_table(1)[battles, a, b].sum())
    loss2 = float(spec.loss_table(2)[battles, b, a].sum())
    return loss1, loss2


def _entries(loss) -> np.ndarray:
    return np.ascontiguousarray(getattr(loss, "entries", loss), dtype=float)


def best_response_value(loss, n: Optional[int] = None) -> tuple[float, Allocation]:
    """Minimum of ``sum_j L(j, s_j)`` over all compositions ``s`` of ``n``.

    Min-plus DP over battles in O(k n^2); the returned allocation is the
    lexicographically first minimiser.
    """
    entries = _entries(loss)
    width = entries.shape[1]
    if n is None:
        n = width - 1
    if not 0 <= n < width:
        raise ValueError(f"n={n} outside loss matrix width {width}")
    entries = np.ascontiguousarray(entries[:, : n + 1])
    h = _kernels.min_plus_suffix(entries)
    alloc = _kernels.min_plus_backtrack(entries, h, n)
    owner = getattr(loss, "owner", 1)
    return float(h[0, n]), Allocation(tuple(alloc.tolist()), owner)


def regret_value(incurred: float, loss, rounds: int) -> float:
    """Average incurred loss minus the best fixed allocation in hindsight."""
    if rounds <= 0:
        return 0.0
    best, _ = best_response_value(loss)
    return (incurred - best) / rounds


def regret(player: int, record: RunRecord, loss) -> float:
    """Regret of ``player`` over the record's played rounds.

    ``loss`` must be the standard cumulative matrix of played rounds only.
    Against a fixed opponent this is never negative; under self-play a
    single player's value can dip below zero, the sum of both cannot.
    """
    return regret_value(record.incurred[player - 1], loss, record.rounds_played)


def exploitability_gaps(spec: GameSpec, profile1: MarginalProfile, profile2: MarginalProfile) -> tuple[float, float]:
    """How much each player could gain by deviating from the average strategies.

    Both gaps are non-negative and they sum to the duality gap of
    ``(x_bar, y_bar)``. Expected losses factor over battles, so only the
    per-battle marginals are needed.
    """
    mu = profile1.probs
    nu = profile2.probs
    t1 = spec.loss_table(1)
    t2 = spec.loss_table(2)
    # exp1[j, a]: player 1's expected loss on battle j with a soldiers vs nu_j.
    exp1 = np.einsum("jab,jb->ja", t1, nu)
    exp2 = np.einsum("jba,ja->jb", t2, mu)
    value1 = float(np.einsum("ja,ja->", mu, exp1))
    value2 = float(np.einsum("jb,jb->", nu, exp2))
    br1, _ = best_response_value(exp1, spec.capacity(1))
    br2, _ = best_response_value(exp2, spec.capacity(2))
    return max(value1 - br1, 0.0), max(value2 - br2, 0.0)


def equilibrium_distance(spec: GameSpec, profile1: MarginalProfile, profile2: MarginalProfile, mode: str = "max") -> float:
    """Exploitability of the average strategy pair.

    ``mode="max"`` is the usual epsilon-Nash certificate; ``mode="min"``
    takes the smaller of the two gaps instead.
    """
    g1, g2 = exploitability_gaps(spec, profile1, profile2)
    if mode == "max":
        return max(g1, g2)
    if mode == "min":
        return min(g1, g2)
    raise ValueError(f"mode must be 'max' or 'min', got {mode!r}")


def average_allocation(record: RunRecord, player: int) -> np.ndarray:
    if record.rounds_played < 1:
        raise ValueError("no rounds played")
    hist = np.asarray(record.histograms[player - 1], dtype=float)
    return hist @ np.arange(hist.shape[1]) / record.rounds_played


def euclidean_distance(x: Sequence[float], y: Sequence[float]) -> float:
    return float(np.linalg.norm(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)))


def loglog_slope(rounds: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of log(value) against log(round); zeros are dropped."""
    r = np.asarray(rounds, dtype=float)
    v = np.asarray(values, dtype=float)
    keep = (r > 0) & (v > 0)
    if keep.sum() < 2:
        return 0.0
    return float(np.polyfit(np.log(r[keep]), np.log(v[keep]), 1)[0])
