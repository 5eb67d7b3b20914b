"""Command-line entry point: ``blotto {solve,vs-fixed,oracle-check,timing-sweep}``.

Exit status: 0 on success, 1 on bad arguments or I/O problems, 2 when
``--strict`` is given and the run (or oracle check) misses its target.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from blotto import data, plots
from blotto.engine import (
    EngineConfig,
    LossMatrix,
    UpdateRule,
    WarmStart,
    run_self_play,
    run_vs_fixed,
    sample_allocations,
)
from blotto.game import Allocation, GameSpec, Rule
from blotto.metrics import Checkpoint, RunRecord, euclidean_distance
from blotto.oracle import empirical_distribution, explicit_distribution, tv_distance

log = logging.getLogger("blotto")

TIMING_KS = (10, 15, 20)
TIMING_PAIRS = ((20, 20), (20, 25), (20, 30), (25, 25), (25, 30), (30, 30))


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse exits 2 by default
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class ExperimentPlan:
    mode: str
    spec: Optional[GameSpec]
    config: EngineConfig
    out: Path
    figures: bool = True
    strict: bool = False
    battle_names: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _num(x: float) -> str:
    return repr(float(x))


def regret_csv(checkpoints: Sequence[Checkpoint], with_eq: bool) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["round", "regret_p1", "regret_p2", "total_regret"] + (["eq_distance"] if with_eq else []))
    for c in checkpoints:
        row = [c.round, _num(c.regret1), _num(c.regret2), _num(c.total_regret)]
        if with_eq:
            row.append("" if c.eq_distance is None else _num(c.eq_distance))
        w.writerow(row)
    return buf.getvalue()


def parse_regret_csv(text: str) -> list[Checkpoint]:
    reader = csv.DictReader(io.StringIO(text))
    out = []
    for row in reader:
        eq = row.get("eq_distance")
        out.append(
            Checkpoint(
                int(row["round"]),
                float(row["regret_p1"]),
                float(row["regret_p2"]),
                float(row["total_regret"]),
                float(eq) if eq else None,
            )
        )
    return out


def reference_vectors(spec: GameSpec, player: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Real-valued proportional and three-halves targets for ``player``."""
    v = np.asarray(spec.values)
    n = spec.capacity(player)
    return n * v / v.sum(), n * v**1.5 / (v**1.5).sum()


def allocation_csv(record: RunRecord, names: Sequence[str]) -> str:
    spec = record.spec
    prop, th = reference_vectors(spec)
    avg1 = record.average_allocation(1)
    avg2 = record.average_allocation(2)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["battle", "value", "avg_p1", "avg_p2", "proportional", "three_halves"])
    for j in range(spec.k):
        w.writerow([names[j], _num(spec.values[j]), _num(avg1[j]), _num(avg2[j]), _num(prop[j]), _num(th[j])])
    return buf.getvalue()


def emit_results(record: RunRecord, plan: ExperimentPlan) -> list[Path]:
    """Write result tables (and figures) for a finished run; returns the paths."""
    names = plan.battle_names or tuple(f"b{j + 1}" for j in range(record.spec.k))
    with_eq = any(c.eq_distance is not None for c in record.checkpoints)
    files = {
        "regret.csv": regret_csv(record.checkpoints, with_eq),
        "allocation.csv": allocation_csv(record, names),
    }
    if plan.figures:
        rounds = [c.round for c in record.checkpoints]
        series = {"total regret": (rounds, [c.total_regret for c in record.checkpoints])}
        if with_eq:
            series["equilibrium distance"] = (rounds, [c.eq_distance or 0.0 for c in record.checkpoints])
        files["regret.svg"] = plots.loglog_curves(series, f"{record.spec.rule.value} rule, {record.spec.k} battles")
        prop, th = reference_vectors(record.spec)
        files["allocation.svg"] = plots.grouped_bars(
            names,
            {
                "player 1": record.average_allocation(1).tolist(),
                "player 2": record.average_allocation(2).tolist(),
                "proportional": prop.tolist(),
                "three-halves": th.tolist(),
            },
            "average allocation",
        )
    written = []
    for name, text in files.items():
        path = plan.out / name
        _atomic_write(path, text)
        written.append(path)
    return written


def summary_line(record: RunRecord) -> str:
    prop, th = reference_vectors(record.spec)
    avg1 = record.average_allocation(1)
    parts = [f"total_regret={record.final.total_regret!r}"]
    if record.learner is not None:
        parts.append(f"learner_regret={(record.final.regret1, record.final.regret2)[record.learner - 1]!r}")
    parts += [
        f"rounds={record.rounds_played}",
        f"converged={'yes' if record.converged else 'no'}",
        f"wall={record.elapsed:.2f}s",
        f"dist_proportional={euclidean_distance(avg1, prop):.3f}",
        f"dist_three_halves={euclidean_distance(avg1, th):.3f}",
    ]
    return " ".join(parts)


# ---------------------------------------------------------------------------
# Argument handling
# ---------------------------------------------------------------------------


def _add_engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--beta", type=float, default=0.995)
    p.add_argument("--rounds", type=int, default=100_000)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--checkpoint", type=int, default=100)
    p.add_argument("--warm", choices=[w.value for w in WarmStart], default="none")
    p.add_argument("--warm-rounds", type=int, default=0)
    p.add_argument("--update", choices=[u.value for u in UpdateRule], default="standard")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eq-distance", action="store_true", help="record exact equilibrium distance at every checkpoint")


def _add_game_flags(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--battles", help="CSV with header battle,value[,advantage] (or a bundled file name)")
    src.add_argument("--election", help="CSV with header state,electoral_votes,visits_p1,visits_p2[,advantage]")
    p.add_argument("--rule", choices=[r.value for r in Rule], default="zero-one")
    p.add_argument("--n1", type=int)
    p.add_argument("--n2", type=int)
    p.add_argument("--voter-scale", type=int, default=2)
    p.add_argument("--out", default="results")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--strict", action="store_true", help="exit 2 if the regret target is not reached")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blotto", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    solve = sub.add_parser("solve", help="self-play: both players learn")
    _add_game_flags(solve)
    _add_engine_flags(solve)

    vs = sub.add_parser("vs-fixed", help="one player repeats a fixed allocation, the other learns")
    _add_game_flags(vs)
    _add_engine_flags(vs)
    vs.add_argument("--fixed-player", type=int, choices=[1, 2], required=True)
    vs.add_argument("--fixed-from", choices=["data", "proportional", "three-halves", "uniform", "file"], default="three-halves")
    vs.add_argument("--fixed-file", help="one integer per battle, comma- or newline-separated (with --fixed-from file)")

    oc = sub.add_parser("oracle-check", help="compare sampler draws with brute-force MWU weights")
    oc.add_argument("--k", type=int, default=3)
    oc.add_argument("--n", type=int, default=5)
    oc.add_argument("--beta", type=float, default=0.9)
    oc.add_argument("--samples", type=int, default=100_000)
    oc.add_argument("--seed", type=int, default=0)
    oc.add_argument("--loss-scale", type=float, default=10.0, help="cumulative losses are drawn from U[0, scale]")
    oc.add_argument("--tolerance", type=float, default=0.02)
    oc.add_argument("--strict", action="store_true")

    ts = sub.add_parser("timing-sweep", help="time-to-target-regret over a grid of game sizes")
    ts.add_argument("--rule", choices=[r.value for r in Rule], default="zero-one")
    ts.add_argument("--beta", type=float, default=0.95)
    ts.add_argument("--epsilon", type=float, default=0.05)
    ts.add_argument("--rounds", type=int, default=200_000, help="safety cap per cell")
    ts.add_argument("--checkpoint", type=int, default=100)
    ts.add_argument("--update", choices=[u.value for u in UpdateRule], default="standard")
    ts.add_argument("--ks", type=int, nargs="+", default=list(TIMING_KS))
    ts.add_argument("--pairs", nargs="+", default=[f"{a}x{b}" for a, b in TIMING_PAIRS], help="capacities as N1xN2")
    ts.add_argument("--seed", type=int, default=0)
    ts.add_argument("--out", default="results")
    ts.add_argument("--strict", action="store_true")
    return parser


def _engine_config(args: argparse.Namespace, **extra) -> EngineConfig:
    return EngineConfig(
        beta=args.beta,
        max_rounds=args.rounds,
        epsilon=args.epsilon,
        checkpoint_every=args.checkpoint,
        warm_start=WarmStart(args.warm),
        warm_rounds=args.warm_rounds,
        update_rule=UpdateRule(args.update),
        seed=args.seed,
        eq_distance=args.eq_distance,
        **extra,
    )


def _game(args: argparse.Namespace) -> tuple[GameSpec, tuple[str, ...], Optional[data.ElectionDataset]]:
    rule = Rule(args.rule)
    if args.election:
        ds = data.load_election_csv(data.resolve(args.election))
        return ds.to_spec(rule, args.voter_scale), ds.states, ds
    values, advantages = data.load_battles_csv(data.resolve(args.battles))
    if args.n1 is None or args.n2 is None:
        raise UsageError("--n1 and --n2 are required with --battles")
    names = tuple(f"b{j + 1}" for j in range(len(values)))
    spec = GameSpec(tuple(values), (args.n1, args.n2), rule, args.voter_scale, tuple(advantages) if any(advantages) else ())
    return spec, names, None


def _fixed_allocation(args: argparse.Namespace, spec: GameSpec, ds: Optional[data.ElectionDataset]) -> Allocation:
    p = args.fixed_player
    if args.fixed_from == "data":
        if ds is None:
            raise UsageError("--fixed-from data needs --election")
        return data.visits_to_allocation(ds, p)
    if args.fixed_from == "file":
        if not args.fixed_file:
            raise UsageError("--fixed-from file needs --fixed-file")
        text = Path(args.fixed_file).read_text(encoding="utf-8")
        amounts = [int(tok) for tok in text.replace(",", " ").split()]
        return spec.validate(Allocation(tuple(amounts), p), p)
    return spec.reference_allocation(args.fixed_from, p)


def _oracle_check(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(args.seed)
    entries = rng.uniform(0.0, args.loss_scale, size=(args.k, args.n + 1))
    loss = LossMatrix(1, entries)
    comps, probs = explicit_distribution(loss, args.beta)
    draws = sample_allocations(loss, args.beta, np.random.default_rng(np.random.SeedSequence(args.seed, spawn_key=(1,))), args.samples)
    tv = tv_distance(empirical_distribution(comps, draws), probs)
    ok = tv < args.tolerance
    print(f"compositions={len(comps)} samples={args.samples} tv_distance={tv:.5f} tolerance={args.tolerance} {'PASS' if ok else 'FAIL'}")
    return 0 if ok or not args.strict else 2


def _timing_cell(task: tuple[int, int, int, str, float, float, int, int, str, int]) -> tuple[int, int, int, float, int, float, bool]:
    k, n1, n2, rule, beta, eps, cap, cp, update, seed = task
    cell_seed = seed * 1_000_003 + k * 10_007 + n1 * 101 + n2
    values = np.random.default_rng(cell_seed).integers(1, 101, size=k)
    spec = GameSpec(tuple(values.tolist()), (n1, n2), Rule(rule))
    cfg = EngineConfig(beta=beta, max_rounds=cap, epsilon=eps, checkpoint_every=cp, update_rule=UpdateRule(update), seed=cell_seed)
    t0 = time.perf_counter()
    rec = run_self_play(spec, cfg)
    return k, n1, n2, time.perf_counter() - t0, rec.rounds_played, rec.final.total_regret, rec.converged


def _timing_sweep(args: argparse.Namespace) -> int:
    pairs = []
    for token in args.pairs:
        try:
            a, b = (int(x) for x in token.lower().split("x"))
        except ValueError:
            raise UsageError(f"bad capacity pair {token!r}; expected N1xN2") from None
        pairs.append((a, b))
    tasks = [(k, a, b, args.rule, args.beta, args.epsilon, args.rounds, args.checkpoint, args.update, args.seed) for k in args.ks for a, b in pairs]
    workers = max(1, int(os.environ.get("BLOTTO_THREADS", "1")))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_timing_cell, tasks))
    else:
        rows = [_timing_cell(t) for t in tasks]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "n1", "n2", "seconds", "rounds", "total_regret", "converged"])
    print(f"{'k':>3} {'n1':>4} {'n2':>4} {'seconds':>9} {'rounds':>8} {'regret':>8}")
    for k, a, b, sec, rounds, reg, conv in rows:
        w.writerow([k, a, b, f"{sec:.3f}", rounds, _num(reg), int(conv)])
        print(f"{k:>3} {a:>4} {b:>4} {sec:>9.3f} {rounds:>8} {reg:>8.4f}{'' if conv else '  (cap)'}")
    _atomic_write(Path(args.out) / "timing.csv", buf.getvalue())
    if args.strict and not all(r[-1] for r in rows):
        return 2
    return 0


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "oracle-check":
            return _oracle_check(args)
        if args.command == "timing-sweep":
            return _timing_sweep(args)
        spec, names, ds = _game(args)
        if args.command == "solve":
            config = _engine_config(args)
            record = run_self_play(spec, config)
        else:
            fixed = _fixed_allocation(args, spec, ds)
            config = _engine_config(args, fixed_player=args.fixed_player, fixed_allocation=fixed)
            record = run_vs_fixed(spec, config, fixed)
        plan = ExperimentPlan(args.command, spec, config, Path(args.out), not args.no_figures, args.strict, names)
        emit_results(record, plan)
        print(summary_line(record))
        if args.strict and not record.converged:
            return 2
        return 0
    except (UsageError, data.DataError, ValueError, OSError) as exc:
        print(f"blotto: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
