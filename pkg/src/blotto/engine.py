"""Sampled multiplicative weights for Electoral Colonel Blotto.

Each player keeps a k x (n+1) matrix of cumulative per-battle losses.  The
MWU weight of a full allocation ``s`` is ``beta ** sum_j L(j, s_j)``, which
factors over battles, so a partition-function DP lets us sample exactly
from the MWU distribution without enumerating strategies.  Everything runs
in log space: ``beta ** (T * L_max)`` underflows doubles long before the
run ends.
"""

from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from blotto import _kernels
from blotto.game import Allocation, GameSpec
from blotto.metrics import (
    Checkpoint,
    MarginalProfile,
    RunRecord,
    equilibrium_distance,
    regret_value,
)

log = logging.getLogger(__name__)


class WarmStart(str, enum.Enum):
    NONE = "none"
    UNIFORM = "uniform"
    PROPORTIONAL = "proportional"
    THREE_HALVES = "three-halves"


class UpdateRule(str, enum.Enum):
    STANDARD = "standard"
    OPTIMISTIC = "optimistic"


@dataclass(frozen=True)
class EngineConfig:
    beta: float = 0.995
    max_rounds: int = 100_000
    epsilon: float = 0.0
    checkpoint_every: int = 100
    warm_start: WarmStart = WarmStart.NONE
    warm_rounds: int = 0
    update_rule: UpdateRule = UpdateRule.STANDARD
    seed: int = 0
    fixed_player: Optional[int] = None
    fixed_allocation: Optional[Allocation] = None
    loss_max: float = 1.0
    eq_distance: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if self.checkpoint_every < 1:
            raise ValueError("checkpoint_every must be >= 1")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.warm_rounds < 0:
            raise ValueError("warm_rounds must be >= 0")
        if self.fixed_player not in (None, 1, 2):
            raise ValueError("fixed_player must be None, 1 or 2")
        object.__setattr__(self, "warm_start", WarmStart(self.warm_start))
        object.__setattr__(self, "update_rule", UpdateRule(self.update_rule))


@dataclass(frozen=True, eq=False)
class LossMatrix:
    """Cumulative losses ``entries[j, m]`` for one player.

    ``last_round`` keeps the most recent single-round loss, which the
    optimistic update subtracts on the following round.
    """

    owner: int
    entries: np.ndarray
    rounds_absorbed: int = 0
    last_round: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        entries = np.array(self.entries, dtype=float)
        if entries.ndim != 2:
            raise ValueError("loss matrix must be two-dimensional")
        if not np.all(np.isfinite(entries)):
            raise ValueError("loss matrix entries must be finite")
        last = np.zeros_like(entries) if self.last_round is None else np.array(self.last_round, dtype=float)
        if last.shape != entries.shape:
            raise ValueError("last_round shape mismatch")
        entries.setflags(write=False)
        last.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "last_round", last)

    @classmethod
    def zeros(cls, spec: GameSpec, player: int) -> "LossMatrix":
        return cls(player, np.zeros((spec.k, spec.capacity(player) + 1)))

    @property
    def k(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1] - 1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LossMatrix):
            return NotImplemented
        return (
            self.owner == other.owner
            and self.rounds_absorbed == other.rounds_absorbed
            and np.array_equal(self.entries, other.entries)
            and np.array_equal(self.last_round, other.last_round)
        )


@dataclass(frozen=True, eq=False)
class LogPartitionTable:
    """``log_f[j, r]``: log of the total MWU weight of placing exactly ``r``
    soldiers on battles ``0..j`` (rows are zero-based)."""

    log_f: np.ndarray
    log_w: np.ndarray

    def partition(self, battles: int, soldiers: int) -> float:
        """``f_battles(soldiers)`` with the one-based battle count."""
        return math.exp(self.log_f[battles - 1, soldiers])


def _log_weights(loss: LossMatrix | np.ndarray, beta: float) -> np.ndarray:
    entries = getattr(loss, "entries", loss)
    return np.ascontiguousarray(np.asarray(entries, dtype=float) * math.log(beta))


def compute_partition(loss: LossMatrix | np.ndarray, beta: float) -> LogPartitionTable:
    log_w = _log_weights(loss, beta)
    log_f = _kernels.log_partition(log_w)
    return LogPartitionTable(log_f, log_w)


def step_weights(table: LogPartitionTable, battle: int, residual: int) -> np.ndarray:
    """Conditional distribution of the amount on zero-based ``battle`` (>= 1)
    given ``residual`` soldiers left for battles ``0..battle``."""
    if battle < 1:
        raise ValueError("battle 0 is determined by the residual")
    y = np.arange(residual + 1)
    logs = table.log_w[battle, y] + table.log_f[battle - 1, residual - y] - table.log_f[battle, residual]
    return np.exp(logs)


def sample_allocation(loss: LossMatrix, beta: float, table: LogPartitionTable | None, rng: np.random.Generator) -> Allocation:
    if table is None:
        table = compute_partition(loss, beta)
    out = np.empty(loss.k, dtype=np.int64)
    _kernels.sample_one(table.log_w, table.log_f, rng.random(max(loss.k - 1, 1)), out)
    return Allocation(tuple(out.tolist()), loss.owner)


def sample_allocations(loss: LossMatrix, beta: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` independent draws as a ``(size, k)`` integer array."""
    table = compute_partition(loss, beta)
    uniforms = rng.random((size, max(loss.k - 1, 1)))
    return _kernels.sample_many(table.log_w, table.log_f, uniforms)


# ---------------------------------------------------------------------------
# Loss updates
# ---------------------------------------------------------------------------


def round_losses(spec: GameSpec, player: int, opponent_alloc: Allocation | np.ndarray) -> np.ndarray:
    """``out[j, m]``: the player's loss on battle j for playing m this round."""
    amounts = opponent_alloc.as_array() if isinstance(opponent_alloc, Allocation) else np.asarray(opponent_alloc)
    table = spec.loss_table(player)
    return table[np.arange(spec.k), :, amounts]


def update_standard(loss: LossMatrix, spec: GameSpec, opponent_alloc: Allocation) -> LossMatrix:
    opp = 2 if loss.owner == 1 else 1
    step = round_losses(spec, loss.owner, spec.validate(opponent_alloc, opp))
    return LossMatrix(loss.owner, loss.entries + step, loss.rounds_absorbed + 1, step)


def update_optimistic(loss: LossMatrix, spec: GameSpec, opponent_alloc: Allocation) -> LossMatrix:
    """Double-count this round and take back the previous round's loss."""
    opp = 2 if loss.owner == 1 else 1
    step = round_losses(spec, loss.owner, spec.validate(opponent_alloc, opp))
    return LossMatrix(loss.owner, loss.entries + 2.0 * step - loss.last_round, loss.rounds_absorbed + 1, step)


def warm_start(spec: GameSpec, player: int, warm: WarmStart | str, rounds: int) -> LossMatrix:
    """Loss matrix pre-loaded with ``rounds`` plays against a reference opponent."""
    warm = WarmStart(warm)
    if rounds < 0:
        raise ValueError("warm-start rounds must be >= 0")
    if warm is WarmStart.NONE or rounds == 0:
        return LossMatrix.zeros(spec, player)
    opp = 2 if player == 1 else 1
    ref = spec.reference_allocation(warm.value, opp)
    # ell_0 stays zero: the warm rounds are synthetic, not a previous play.
    return LossMatrix(player, rounds * round_losses(spec, player, ref), rounds)


# ---------------------------------------------------------------------------
# Repeated play
# ---------------------------------------------------------------------------


def player_rngs(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent per-player streams keyed by player label."""
    return tuple(np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(p,))) for p in (1, 2))  # type: ignore[return-value]


class _Learner:
    """Mutable per-player state used inside the run loop."""

    def __init__(self, spec: GameSpec, player: int, config: EngineConfig, rng: np.random.Generator) -> None:
        self.player = player
        self.n = spec.capacity(player)
        self.k = spec.k
        self.table = spec.loss_table(player)
        self.rng = rng
        self.log_beta = math.log(config.beta)
        self.optimistic = config.update_rule is UpdateRule.OPTIMISTIC
        start = warm_start(spec, player, config.warm_start, config.warm_rounds)
        self.sampling = np.array(start.entries)
        self.history = np.zeros((self.k, self.n + 1))
        self.last = np.zeros((self.k, self.n + 1))
        self.hist = np.zeros((self.k, self.n + 1), dtype=np.int64)
        self.incurred = 0.0
        self.log_w = np.empty_like(self.sampling)
        self.draw = np.empty(self.k, dtype=np.int64)
        self.max_abs_log_f = 0.0
        self.nonfinite = False

    def sample(self) -> np.ndarray:
        np.multiply(self.sampling, self.log_beta, out=self.log_w)
        log_f = _kernels.log_partition(self.log_w)
        _kernels.sample_one(self.log_w, log_f, self.rng.random(max(self.k - 1, 1)), self.draw)
        if not np.isfinite(log_f).all():
            self.nonfinite = True
        self.max_abs_log_f = max(self.max_abs_log_f, abs(log_f[-1, -1]))
        return self.draw.copy()

    def absorb(self, own: np.ndarray, opponent: np.ndarray, battles: np.ndarray) -> None:
        step = self.table[battles, :, opponent]
        self.incurred += float(step[battles, own].sum())
        self.hist[battles, own] += 1
        self.history += step
        if self.optimistic:
            self.sampling += 2.0 * step - self.last
            self.last = step
        else:
            self.sampling += step

    def regret(self, rounds: int) -> float:
        return regret_value(self.incurred, self.history, rounds)


@dataclass
class RunDiagnostics:
    max_abs_log_partition: float = 0.0
    nonfinite_partition: bool = False


def _run(spec: GameSpec, config: EngineConfig, fixed: Optional[Allocation], diagnostics: Optional[RunDiagnostics]) -> RunRecord:
    t0 = time.perf_counter()
    rngs = player_rngs(config.seed)
    learners = [_Learner(spec, p, config, rngs[p - 1]) for p in (1, 2)]
    fixed_player = config.fixed_player if fixed is not None else None
    fixed_draw = fixed.as_array() if fixed is not None else None
    learner_id = None if fixed_player is None else 3 - fixed_player
    battles = np.arange(spec.k)
    traj = [np.empty((config.max_rounds, spec.k), dtype=np.int64) for _ in (1, 2)]
    checkpoints: list[Checkpoint] = []
    converged = False
    t = 0
    for t in range(1, config.max_rounds + 1):
        # Both moves use only rounds < t; updates happen after both exist.
        moves = [
            fixed_draw if fixed_player == p else learners[p - 1].sample()
            for p in (1, 2)
        ]
        learners[0].absorb(moves[0], moves[1], battles)
        learners[1].absorb(moves[1], moves[0], battles)
        traj[0][t - 1] = moves[0]
        traj[1][t - 1] = moves[1]
        if t % config.checkpoint_every == 0 or t == config.max_rounds:
            r1 = learners[0].regret(t)
            r2 = learners[1].regret(t)
            eq = None
            if config.eq_distance:
                eq = equilibrium_distance(
                    spec,
                    MarginalProfile.from_histogram(learners[0].hist),
                    MarginalProfile.from_histogram(learners[1].hist),
                )
            checkpoints.append(Checkpoint(t, r1, r2, r1 + r2, eq))
            stop_regret = r1 + r2 if learner_id is None else (r1, r2)[learner_id - 1]
            log.debug("round %d regret %.5f/%.5f", t, r1, r2)
            if stop_regret <= config.epsilon:
                converged = True
                break
    if diagnostics is not None:
        diagnostics.max_abs_log_partition = max(l.max_abs_log_f for l in learners)
        diagnostics.nonfinite_partition = any(l.nonfinite for l in learners)
    return RunRecord(
        spec=spec,
        config=config,
        histograms=(learners[0].hist, learners[1].hist),
        incurred=(learners[0].incurred, learners[1].incurred),
        checkpoints=checkpoints,
        rounds_played=t,
        warm_rounds=config.warm_rounds if config.warm_start is not WarmStart.NONE else 0,
        converged=converged,
        trajectory=(traj[0][:t].copy(), traj[1][:t].copy()),
        learner=learner_id,
        elapsed=time.perf_counter() - t0,
    )


def run_self_play(spec: GameSpec, config: EngineConfig, diagnostics: Optional[RunDiagnostics] = None) -> RunRecord:
    """Both players learn by sampled MWU until total regret <= epsilon or T rounds.

    Hitting ``max_rounds`` first is not an error; ``record.converged`` is
    then False.
    """
    if config.fixed_player is not None:
        raise ValueError("self-play requires fixed_player=None; use run_vs_fixed")
    return _run(spec, config, None, diagnostics)


def run_vs_fixed(spec: GameSpec, config: EngineConfig, fixed: Allocation | None = None, diagnostics: Optional[RunDiagnostics] = None) -> RunRecord:
    """One player repeats ``fixed`` every round; the other learns.

    Stopping looks at the learner's regret only.
    """
    fixed = fixed if fixed is not None else config.fixed_allocation
    if fixed is None or config.fixed_player is None:
        raise ValueError("run_vs_fixed needs config.fixed_player and a fixed allocation")
    fixed = spec.validate(fixed, config.fixed_player)
    if config.fixed_allocation is None:
        config = replace(config, fixed_allocation=fixed)
    return _run(spec, config, fixed, diagnostics)
