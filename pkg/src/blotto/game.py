"""Game specifications, winning rules and closed-form reference allocations.

Losses are always reported for player 1 first. Every rule produces a
zero-sum split of the battle value: ``loss1 + loss2 == value``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy


class Rule(str, enum.Enum):
    ZERO_ONE = "zero-one"
    POPULAR_VOTE = "pv"
    ELECTORAL_VOTE = "ev"


class LossPair(NamedTuple):
    loss1: float
    loss2: float


@dataclass(frozen=True)
class Allocation:
    amounts: tuple[int, ...]
    owner: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "amounts", tuple(int(a) for a in self.amounts))
        if self.owner not in (1, 2):
            raise ValueError(f"owner must be 1 or 2, got {self.owner}")
        if any(a < 0 for a in self.amounts):
            raise ValueError(f"allocation amounts must be non-negative: {self.amounts}")

    @property
    def total(self) -> int:
        return sum(self.amounts)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.amounts, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.amounts)


# ---------------------------------------------------------------------------
# Winning rules (vectorised cores; scalar wrappers below)
# ---------------------------------------------------------------------------


def _share(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Player 1's share a/(a+b), with 0.5 where both are zero."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    tot = a + b
    with np.errstate(invalid="ignore", divide="ignore"):
        q = np.where(tot > 0, a / np.where(tot > 0, tot, 1.0), 0.5)
    return q


def ev_threshold(u: int, advantage: float) -> int:
    """Voter count at which the state ties, shifted by player 1's advantage.

    Half-up rounding of ``u/2 * (1 - advantage/100)``, clamped to ``[0, u]``.
    """
    tau = math.floor(u / 2 * (1.0 - advantage / 100.0) + 0.5)
    return min(max(tau, 0), u)


def _check_voters(u: int) -> None:
    if int(u) != u or u < 2 or int(u) % 2:
        raise ValueError(f"undecided voter count must be an even integer >= 2, got {u}")


def ev_win_probability_grid(a, b, u: int, advantage: float = 0.0) -> np.ndarray:
    """Vectorised player-1 win probability under the electoral-vote rule.

    ``a`` and ``b`` broadcast against each other. Binomial terms are summed
    from log-domain pmf values so large ``u`` stays stable.
    """
    _check_voters(u)
    u = int(u)
    q = _share(a, b)
    tau = ev_threshold(u, advantage)
    x = np.arange(u + 1, dtype=float)
    log_choose = gammaln(u + 1) - gammaln(x + 1) - gammaln(u - x + 1)
    qe = q[..., None]
    log_pmf = log_choose + xlogy(x, qe) + xlog1py(u - x, -qe)
    pmf = np.exp(log_pmf)
    win = pmf[..., tau + 1 :].sum(axis=-1) + 0.5 * pmf[..., tau]
    # Both allocations empty: fair coin regardless of the advantage.
    both_zero = (np.asarray(a) == 0) & (np.asarray(b) == 0)
    return np.where(both_zero, 0.5, np.clip(win, 0.0, 1.0))


def player1_loss_fraction(rule: Rule, a, b, u: int = 2, advantage: float = 0.0) -> np.ndarray:
    """Fraction of a battle's value lost by player 1, broadcast over ``a``, ``b``."""
    rule = Rule(rule)
    a = np.asarray(a)
    b = np.asarray(b)
    if rule is Rule.ZERO_ONE:
        return np.where(a < b, 1.0, np.where(a == b, 0.5, 0.0))
    if rule is Rule.POPULAR_VOTE:
        return 1.0 - _share(a, b)
    return 1.0 - ev_win_probability_grid(a, b, u, advantage)


def loss_zero_one(a: int, b: int, v: float) -> LossPair:
    if a < 0 or b < 0:
        raise ValueError("allocations must be non-negative")
    loss1 = v * (1.0 if a < b else 0.5 if a == b else 0.0)
    return LossPair(loss1, v - loss1)


def loss_popular_vote(a: int, b: int, v: float) -> LossPair:
    """Proportional rule. An opponent at zero means player 1 loses nothing."""
    if a < 0 or b < 0:
        raise ValueError("allocations must be non-negative")
    loss1 = 0.5 * v if a + b == 0 else v * b / (a + b)
    return LossPair(loss1, v - loss1)


def ev_win_probability(a: int, b: int, u: int, advantage: float = 0.0) -> float:
    if a < 0 or b < 0:
        raise ValueError("allocations must be non-negative")
    return float(ev_win_probability_grid(a, b, u, advantage))


def loss_electoral_vote(a: int, b: int, v: float, u: int, advantage: float = 0.0) -> LossPair:
    loss1 = v * (1.0 - ev_win_probability(a, b, u, advantage))
    return LossPair(loss1, v - loss1)


# ---------------------------------------------------------------------------
# Reference allocations
# ---------------------------------------------------------------------------


def _largest_remainder(weights: Sequence[float], n: int, owner: int) -> Allocation:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or len(w) == 0 or np.any(w <= 0):
        raise ValueError("weights must be a non-empty list of positive numbers")
    if n < 0:
        raise ValueError("capacity must be non-negative")
    targets = n * w / w.sum()
    base = np.floor(targets).astype(np.int64)
    short = n - int(base.sum())
    # Stable sort keeps the lowest battle index first among equal remainders.
    order = np.argsort(-(targets - base), kind="stable")
    base[order[:short]] += 1
    return Allocation(tuple(base.tolist()), owner)


def proportional_allocation(values: Sequence[float], n: int, owner: int = 1) -> Allocation:
    return _largest_remainder(values, n, owner)


def three_halves_allocation(values: Sequence[float], n: int, owner: int = 1) -> Allocation:
    return _largest_remainder(np.asarray(values, dtype=float) ** 1.5, n, owner)


def uniform_allocation(k: int, n: int, owner: int = 1) -> Allocation:
    if k < 1:
        raise ValueError("need at least one battle")
    q, rem = divmod(n, k)
    return Allocation(tuple(q + (1 if j < rem else 0) for j in range(k)), owner)


# ---------------------------------------------------------------------------
# Game specification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GameSpec:
    """A two-player Electoral Colonel Blotto instance.

    ``values`` keeps the caller's battle values; ``weights`` holds them
    normalised to sum to one, which is what every loss is computed from.
    """

    values: tuple[float, ...]
    capacities: tuple[int, int]
    rule: Rule = Rule.ZERO_ONE
    voter_scale: int = 2
    advantages: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValueError("need at least one battle")
        if any(not math.isfinite(v) or v <= 0 for v in values):
            raise ValueError(f"battle values must be positive, got {values}")
        n1, n2 = (int(c) for c in self.capacities)
        if n1 < 0 or n2 < 0:
            raise ValueError("capacities must be non-negative")
        advantages = tuple(float(d) for d in self.advantages) or (0.0,) * len(values)
        if len(advantages) != len(values):
            raise ValueError("one advantage per battle is required")
        if any(abs(d) >= 100 for d in advantages):
            raise ValueError("advantages must lie strictly between -100 and 100")
        rule = Rule(self.rule)
        if rule is not Rule.ELECTORAL_VOTE and any(advantages):
            raise ValueError("advantages are only defined for the electoral-vote rule")
        if self.voter_scale < 2 or self.voter_scale % 2:
            raise ValueError(f"voter_scale must be an even integer >= 2, got {self.voter_scale}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "capacities", (n1, n2))
        object.__setattr__(self, "advantages", advantages)
        object.__setattr__(self, "rule", rule)

    @property
    def k(self) -> int:
        return len(self.values)

    @property
    def weights(self) -> np.ndarray:
        v = np.asarray(self.values)
        return v / v.sum()

    def capacity(self, player: int) -> int:
        return self.capacities[player - 1]

    def undecided_voters(self) -> tuple[int, ...]:
        """Per-battle undecided voter counts ``C * v_j``, forced even and >= 2."""
        return tuple(max(2, 2 * round(self.voter_scale * v / 2)) for v in self.values)

    @cached_property
    def _tables(self) -> tuple[np.ndarray, np.ndarray]:
        n1, n2 = self.capacities
        a = np.arange(n1 + 1)[:, None]
        b = np.arange(n2 + 1)[None, :]
        voters = self.undecided_voters()
        t1 = np.empty((self.k, n1 + 1, n2 + 1))
        for j, w in enumerate(self.weights):
            t1[j] = w * player1_loss_fraction(self.rule, a, b, voters[j], self.advantages[j])
        t2 = self.weights[:, None, None] - t1
        t1.setflags(write=False)
        t2 = np.ascontiguousarray(t2.transpose(0, 2, 1))
        t2.setflags(write=False)
        return t1, t2

    def loss_table(self, player: int) -> np.ndarray:
        """Read-only array ``T[j, m, o]``: the player's loss on battle ``j``
        when playing ``m`` against an opponent's ``o``."""
        return self._tables[player - 1]

    def battle_losses(self, a: int, b: int, battle: int) -> LossPair:
        """Loss split on a single battle, using the normalised value."""
        l1 = float(self._tables[0][battle, a, b])
        return LossPair(l1, float(self.weights[battle]) - l1)

    def validate(self, alloc: Allocation | Sequence[int], player: int) -> Allocation:
        if not isinstance(alloc, Allocation):
            alloc = Allocation(tuple(alloc), player)
        if len(alloc) != self.k:
            raise ValueError(f"allocation has {len(alloc)} battles, game has {self.k}")
        if alloc.total != self.capacity(player):
            raise ValueError(
                f"player {player} allocation sums to {alloc.total}, capacity is {self.capacity(player)}"
            )
        return alloc

    def reference_allocation(self, kind: str, player: int) -> Allocation:
        n = self.capacity(player)
        if kind == "uniform":
            return uniform_allocation(self.k, n, player)
        if kind == "proportional":
            return proportional_allocation(self.values, n, player)
        if kind == "three-halves":
            return three_halves_allocation(self.values, n, player)
        raise ValueError(f"unknown reference allocation {kind!r}")
