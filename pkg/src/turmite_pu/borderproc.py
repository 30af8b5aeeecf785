"""Border processes: exit/re-entry protocols on a square region.

A border process prescribes, for each of k rounds, where the head is
re-inserted as a function of the exit coordinates seen so far, plus a
time component reported with the final entry.  Abstract realizations are
token networks computing the same map; concrete realizations are tape
environments built from catcher systems and wiring (see realization.py).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .core import Coord, SparseConfig, TurmiteDef
from .catchers import inward_direction
from .dynamics import EscapeResult, Region, escape
from .machines import build_M
from .sautomata import Network, UndefinedWord, run_network_word


class ContainmentViolation(AssertionError):
    pass


class Mismatch(AssertionError):
    pass


@dataclass(frozen=True)
class BorderProcess:
    """(patterns, f) on the square [0, n-1]^2 with k exit/entry rounds.

    ``next_entry(prefix)`` maps the exits seen so far to the next entry
    coordinate (prefix causality is structural); ``time_component(seq)``
    is the number reported with the final entry.
    """

    n: int
    depth: int
    patterns: tuple[SparseConfig, ...]
    next_entry: Callable[[tuple[Coord, ...]], Coord]
    time_component: Callable[[tuple[Coord, ...]], int]

    def __post_init__(self):
        for p in self.patterns:
            if p.head is None:
                raise ValueError("patterns must carry the head")

    @property
    def region(self) -> Region:
        return Region(0, self.n - 1, 0, self.n - 1)

    def margin_ok(self) -> bool:
        """Whether the support sits at depth k, the worst-case condition
        under which per-round shrinking containment can be asserted."""
        k = self.depth
        lo, hi = k, self.n - 1 - k
        if lo > hi:
            return False
        for p in self.patterns:
            pts = set(p.ones) | {p.head_pos}
            if not all(lo <= x <= hi and lo <= y <= hi for (x, y) in pts):
                return False
        return True

    def apply(self, seq: Sequence[Coord]) -> tuple[tuple[Coord, ...], int]:
        """The full map B^k -> B^k x time."""
        seq = tuple(seq)
        if len(seq) != self.depth:
            raise ValueError("sequence length must equal the depth")
        outs = []
        for i in range(1, self.depth + 1):
            outs.append(self.next_entry(seq[:i]))
        return tuple(outs), self.time_component(seq)


def table_process(n: int, depth: int, patterns, table: dict,
                  times: dict, default_entry: Coord) -> BorderProcess:
    """A border process from prefix tables (useful for toys).

    ``table`` maps exit prefixes to entry coordinates; missing prefixes
    fall back to the default.  ``times`` maps full exit sequences to the
    time component (missing: 0).
    """
    def next_entry(prefix):
        return table.get(tuple(prefix), default_entry)

    def time_component(seq):
        return times.get(tuple(seq), 0)

    return BorderProcess(n, depth, tuple(patterns), next_entry,
                         time_component)


@dataclass
class RoundRecord:
    exit_coord: Coord
    entry_coord: Optional[Coord]
    dwell: int          # steps from the round's start to the exit


@dataclass
class EvalResult:
    final: SparseConfig
    time_component: int
    rounds: list[RoundRecord]

    @property
    def exits(self) -> tuple[Coord, ...]:
        return tuple(r.exit_coord for r in self.rounds)

    @property
    def entries(self) -> tuple[Coord, ...]:
        return tuple(r.entry_coord for r in self.rounds)


def eval_border_process(bp: BorderProcess, pattern: SparseConfig,
                        machine: Optional[TurmiteDef] = None,
                        check_containment: Optional[bool] = None
                        ) -> EvalResult:
    """Run the k-round exit/teleport-entry loop.

    Each round lets the head escape the square, consults the process for
    the re-entry coordinate, and re-places the head there facing the
    region.  When the depth margin holds, the shrinking containment of
    the support is asserted per round.
    """
    machine = machine or build_M()
    if check_containment is None:
        check_containment = bp.margin_ok()
    region = bp.region
    cfg = pattern
    exits: list[Coord] = []
    rounds: list[RoundRecord] = []
    for i in range(1, bp.depth + 1):
        res: EscapeResult = escape(machine, cfg, region)
        b = res.exit_coord
        if b not in _border(bp.n):
            raise ContainmentViolation(f"round {i}: exit at {b} is not a "
                                       "border coordinate")
        exits.append(b)
        if check_containment:
            lo = bp.depth - i
            hi = bp.n - 1 - (bp.depth - i)
            for (x, y) in res.exit_config.ones:
                if not (lo <= x <= hi and lo <= y <= hi):
                    raise ContainmentViolation(
                        f"round {i}: symbol at {(x, y)} outside depth box")
        b2 = bp.next_entry(tuple(exits))
        if b2 not in _border(bp.n):
            raise ValueError(f"process returned non-border entry {b2}")
        cfg = res.exit_config.with_head(inward_direction(b2, bp.n), b2)
        rounds.append(RoundRecord(b, b2, res.tau))
    t = bp.time_component(tuple(exits))
    return EvalResult(cfg, t, rounds)


def _border(n: int) -> set[Coord]:
    out = set()
    for i in range(n):
        out |= {(-1, i), (n, i), (i, -1), (i, n)}
    return out


def consistent_timing_table(bp: BorderProcess,
                            machine: Optional[TurmiteDef] = None) -> dict:
    """Dwell times per (round, entry, exit) over all patterns.

    Raises Mismatch if two patterns disagree, i.e. the process lacks
    consistent timing.  Round 1 is keyed with entry None.
    """
    machine = machine or build_M()
    table: dict = {}
    for p in bp.patterns:
        res = eval_border_process(bp, p, machine)
        entry = None
        for i, rr in enumerate(res.rounds, start=1):
            key = (i, entry, rr.exit_coord)
            if key in table and table[key] != rr.dwell:
                raise Mismatch(f"inconsistent timing at {key}: "
                               f"{table[key]} vs {rr.dwell}")
            table[key] = rr.dwell
            entry = rr.entry_coord
    return table


# ---------------------------------------------------------------------------
# abstract realizations

def term_in(j: int, b: Coord) -> str:
    return f"i{j}({b[0]},{b[1]})"


def term_out(j: int, b: Coord) -> str:
    return f"o{j}({b[0]},{b[1]})"


def term_out_final(k: int, b: Coord, t: int) -> str:
    return f"o{k}({b[0]},{b[1]},{t})"


def parse_final_terminal(name: str) -> tuple[Coord, int]:
    inner = name.split("(", 1)[1].rstrip(")")
    x, y, t = (int(v) for v in inner.split(","))
    return (x, y), t


def check_abstract_realization(bp: BorderProcess, net: Network, q0,
                               sequences: Iterable[Sequence[Coord]],
                               require_constant_weight: bool = True) -> None:
    """run_word on the network must reproduce f's outputs and time.

    Raises Mismatch with a witness sequence on disagreement.
    """
    weights = set()
    for seq in sequences:
        seq = tuple(seq)
        word = [term_in(j, b) for j, b in enumerate(seq, start=1)]
        want_outs, want_t = bp.apply(seq)
        expected = [term_out(j, b) for j, b in
                    enumerate(want_outs[:-1], start=1)]
        expected.append(term_out_final(bp.depth, want_outs[-1], want_t))
        start = dict(q0) if isinstance(q0, dict) else q0
        try:
            res = run_network_word(net, start, word)
        except UndefinedWord as e:
            raise Mismatch(f"network undefined on {seq} after "
                           f"{e.prefix} letters") from None
        if list(res.outputs) != expected:
            raise Mismatch(f"sequence {seq}: outputs {res.outputs} "
                           f"!= {expected}")
        weights.add(res.weight)
    if require_constant_weight and len(weights) > 1:
        raise Mismatch(f"weights differ across sequences: {weights}")


def reachable_sequences(bp: BorderProcess,
                        machine: Optional[TurmiteDef] = None) -> list[tuple]:
    """The exit sequences actually produced by the patterns."""
    machine = machine or build_M()
    return sorted({eval_border_process(bp, p, machine).exits
                   for p in bp.patterns})
