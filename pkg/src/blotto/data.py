"""Battle-value and election CSV files.

Both formats are UTF-8 CSV with an exact header row; lines starting with
``#`` are comments. Parsing is strict and errors name the offending line.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterator, Sequence

from blotto.game import Allocation, GameSpec, Rule

BATTLE_HEADER = ("battle", "value")
ELECTION_HEADER = ("state", "electoral_votes", "visits_p1", "visits_p2")

BUNDLED = ("fixed5.csv", "quadratic5.csv", "election_2008.csv", "election_2020.csv")


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class StateRow:
    state: str
    electoral_votes: int
    visits_p1: int
    visits_p2: int
    advantage: float = 0.0


@dataclass(frozen=True)
class ElectionDataset:
    rows: tuple[StateRow, ...]

    def __post_init__(self) -> None:
        if not self.rows:
            raise DataError("election dataset is empty")
        names = [r.state for r in self.rows]
        if len(set(names)) != len(names):
            raise DataError("state names must be unique")

    @property
    def states(self) -> tuple[str, ...]:
        return tuple(r.state for r in self.rows)

    @property
    def totals(self) -> tuple[int, int]:
        return sum(r.visits_p1 for r in self.rows), sum(r.visits_p2 for r in self.rows)

    @property
    def values(self) -> tuple[int, ...]:
        return tuple(r.electoral_votes for r in self.rows)

    @property
    def advantages(self) -> tuple[float, ...]:
        return tuple(r.advantage for r in self.rows)

    def to_spec(self, rule: Rule | str = Rule.ELECTORAL_VOTE, voter_scale: int = 2) -> GameSpec:
        rule = Rule(rule)
        adv = self.advantages if rule is Rule.ELECTORAL_VOTE else ()
        return GameSpec(self.values, self.totals, rule, voter_scale, adv)


def _rows(text: str, source: str) -> Iterator[tuple[int, list[str]]]:
    lines = text.splitlines()
    numbered = [(i + 1, line) for i, line in enumerate(lines) if line.strip() and not line.lstrip().startswith("#")]
    reader = csv.reader(line for _, line in numbered)
    for (lineno, _), row in zip(numbered, reader):
        yield lineno, [cell.strip() for cell in row]


def _read_text(path: str | Path) -> tuple[str, str]:
    p = Path(path)
    try:
        return p.read_text(encoding="utf-8"), str(p)
    except FileNotFoundError:
        raise DataError(f"{p}: no such file") from None


def _number(cell: str, lineno: int, source: str, name: str) -> float:
    try:
        x = float(cell)
    except ValueError:
        raise DataError(f"{source}:{lineno}: {name} {cell!r} is not a number") from None
    if not math.isfinite(x):
        raise DataError(f"{source}:{lineno}: {name} must be finite")
    return x


def _count(cell: str, lineno: int, source: str, name: str) -> int:
    try:
        x = int(cell)
    except ValueError:
        raise DataError(f"{source}:{lineno}: {name} {cell!r} is not an integer") from None
    if x < 0:
        raise DataError(f"{source}:{lineno}: {name} must be non-negative")
    return x


def _check_header(header: list[str], required: Sequence[str], lineno: int, source: str) -> bool:
    """Return whether the optional ``advantage`` column is present."""
    req = list(required)
    if header == req:
        return False
    if header == req + ["advantage"]:
        return True
    raise DataError(f"{source}:{lineno}: expected header {','.join(req)}[,advantage], got {','.join(header)}")


def parse_battles(text: str, source: str = "<battles>") -> tuple[list[float], list[float]]:
    rows = _rows(text, source)
    try:
        lineno, header = next(rows)
    except StopIteration:
        raise DataError(f"{source}: file is empty") from None
    has_adv = _check_header(header, BATTLE_HEADER, lineno, source)
    width = 3 if has_adv else 2
    values: list[float] = []
    advantages: list[float] = []
    for lineno, row in rows:
        if len(row) != width:
            raise DataError(f"{source}:{lineno}: expected {width} fields, got {len(row)}")
        v = _number(row[1], lineno, source, "value")
        if v <= 0:
            raise DataError(f"{source}:{lineno}: value must be positive, got {row[1]}")
        values.append(v)
        advantages.append(_number(row[2], lineno, source, "advantage") if has_adv else 0.0)
    if not values:
        raise DataError(f"{source}: no battle rows")
    return values, advantages


def load_battles_csv(path: str | Path) -> tuple[list[float], list[float]]:
    text, source = _read_text(path)
    return parse_battles(text, source)


def parse_election(text: str, source: str = "<election>") -> ElectionDataset:
    rows = _rows(text, source)
    try:
        lineno, header = next(rows)
    except StopIteration:
        raise DataError(f"{source}: file is empty") from None
    has_adv = _check_header(header, ELECTION_HEADER, lineno, source)
    width = 5 if has_adv else 4
    out = []
    for lineno, row in rows:
        if len(row) != width:
            raise DataError(f"{source}:{lineno}: expected {width} fields, got {len(row)}")
        ev = _count(row[1], lineno, source, "electoral_votes")
        if ev == 0:
            raise DataError(f"{source}:{lineno}: electoral_votes must be positive")
        adv = _number(row[4], lineno, source, "advantage") if has_adv else 0.0
        out.append(StateRow(row[0], ev, _count(row[2], lineno, source, "visits_p1"), _count(row[3], lineno, source, "visits_p2"), adv))
    try:
        return ElectionDataset(tuple(out))
    except DataError as exc:
        raise DataError(f"{source}: {exc}") from None


def load_election_csv(path: str | Path) -> ElectionDataset:
    text, source = _read_text(path)
    return parse_election(text, source)


def dump_battles(values: Sequence[float], advantages: Sequence[float] | None = None, names: Sequence[str] | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    with_adv = advantages is not None and any(advantages)
    w.writerow(BATTLE_HEADER + (("advantage",) if with_adv else ()))
    for j, v in enumerate(values):
        name = names[j] if names else f"b{j + 1}"
        w.writerow([name, repr(float(v))] + ([repr(float(advantages[j]))] if with_adv else []))  # type: ignore[index]
    return buf.getvalue()


def dump_election(dataset: ElectionDataset) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    with_adv = any(dataset.advantages)
    w.writerow(ELECTION_HEADER + (("advantage",) if with_adv else ()))
    for r in dataset.rows:
        w.writerow([r.state, r.electoral_votes, r.visits_p1, r.visits_p2] + ([repr(r.advantage)] if with_adv else []))
    return buf.getvalue()


def visits_to_allocation(dataset: ElectionDataset, party: int) -> Allocation:
    if party not in (1, 2):
        raise ValueError("party must be 1 or 2")
    visits = tuple(r.visits_p1 if party == 1 else r.visits_p2 for r in dataset.rows)
    return Allocation(visits, party)


def bundled_path(name: str) -> Path:
    if name not in BUNDLED:
        raise DataError(f"unknown bundled file {name!r}; choose from {', '.join(BUNDLED)}")
    return Path(str(resources.files("blotto") / "data" / name))


def resolve(path: str | Path) -> Path:
    """A filesystem path, or the name of a bundled data file."""
    p = Path(path)
    if not p.exists() and str(path) in BUNDLED:
        return bundled_path(str(path))
    return p
