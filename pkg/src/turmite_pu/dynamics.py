"""Escape times, the potential function, containment and recurrence checks,
and the cubic-escape-time configuration family."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import Coord, HeadRequired, SparseConfig, TurmiteDef, _RunState
from .machines import DIRECTIONS, LEFT, RIGHT, VEC


class EscapeTimeout(RuntimeError):
    """The head did not leave the region within the step cap."""


class ViolationAt(AssertionError):
    """A containment invariant failed at the given step index."""

    def __init__(self, t: int, message: str):
        super().__init__(f"step {t}: {message}")
        self.t = t


@dataclass(frozen=True)
class Region:
    """The rectangle [xmin,xmax] x [ymin,ymax] in cells."""

    xmin: int
    xmax: int
    ymin: int
    ymax: int

    def __post_init__(self):
        if self.xmin > self.xmax or self.ymin > self.ymax:
            raise ValueError("degenerate region")

    def contains(self, v: Coord) -> bool:
        return (self.xmin <= v[0] <= self.xmax
                and self.ymin <= v[1] <= self.ymax)

    def expand(self, k: int) -> "Region":
        return Region(self.xmin - k, self.xmax + k,
                      self.ymin - k, self.ymax + k)

    @property
    def side(self) -> int:
        return max(self.xmax - self.xmin, self.ymax - self.ymin) + 1


@dataclass(frozen=True)
class EscapeResult:
    tau: int
    exit_config: SparseConfig
    exit_coord: Coord
    exit_state: str


def default_escape_cap(n: int) -> int:
    # comfortably above the quartic potential bound for all tested sizes
    return 64 * (n + 2) ** 4


def escape(machine: TurmiteDef, cfg: SparseConfig, region: Region,
           cap: Optional[int] = None) -> EscapeResult:
    """Run until the head first leaves the region.

    Raises EscapeTimeout when the cap is exceeded; for the 5-state
    machine the default cap is far above the quartic escape bound, so a
    timeout signals a malformed call rather than slow dynamics.
    """
    if cfg.head is None:
        raise HeadRequired("escape needs a head")
    if cap is None:
        cap = default_escape_cap(region.side)
    st = _RunState(machine, cfg)
    contains = region.contains
    # a head placed on the border (the terminal protocol) must first
    # enter; only the exit after that stops the clock
    been_inside = contains(st.pos)
    for t in range(1, cap + 1):
        st.step()
        if contains(st.pos):
            been_inside = True
        elif been_inside:
            out = st.freeze()
            return EscapeResult(t, out, st.pos, st.state)
    raise EscapeTimeout(f"no escape within {cap} steps")


def potential(cfg: SparseConfig, n: int) -> int:
    """Escape potential in the normalized frame.

    The head term depends on the state and the Manhattan norm of the
    position; the tape term sums squared Manhattan norms of the 1s inside
    [0, n+1]^2.  Callers are responsible for translating their region to
    this frame.
    """
    return potential_head(cfg) + potential_tape(cfg, n)


def potential_head(cfg: SparseConfig) -> int:
    if cfg.head is None:
        raise HeadRequired("potential needs a head")
    q, (x, y) = cfg.head
    m = abs(x) + abs(y)
    if q == "E":
        return -2 * m + 2
    if q == "N":
        return -2 * m
    if q == "W":
        return 2 * m + 2
    if q == "S":
        return 2 * m
    raise ValueError(f"potential undefined for state {q!r}")


def potential_tape(cfg: SparseConfig, n: int) -> int:
    if cfg.background != 0:
        raise ValueError("tape potential assumes background 0")
    total = 0
    for (x, y) in cfg.ones:
        if 0 <= x <= n + 1 and 0 <= y <= n + 1:
            total += (abs(x) + abs(y)) ** 2
    return total


@dataclass(frozen=True)
class TurnEvent:
    t: int
    kind: str  # left | right | straight


def classify_turns(machine: TurmiteDef, cfg: SparseConfig,
                   t_max: int) -> list[TurnEvent]:
    """Per-step turn classification from consecutive headings.

    Intended for the 4-state machine, whose state is its heading.
    """
    if cfg.head is None:
        raise HeadRequired("turn classification needs a head")
    st = _RunState(machine, cfg)
    events = []
    for t in range(t_max):
        before = st.state
        st.step()
        after = st.state
        if after == before:
            kind = "straight"
        elif after == LEFT[before]:
            kind = "left"
        elif after == RIGHT[before]:
            kind = "right"
        else:
            raise ViolationAt(t, f"heading jumped {before} -> {after}")
        events.append(TurnEvent(t, kind))
    return events


@dataclass(frozen=True)
class ContainmentReport:
    steps: int
    region: Region
    expanded: Region
    exit_time: Optional[int]


def containment_check(machine: TurmiteDef, cfg: SparseConfig, t_max: int,
                      region: Optional[Region] = None) -> ContainmentReport:
    """Support stays in the 1-expanded rectangle; a departed head is inert.

    Therectangle defaults to the bounding box of support plus head.  For
    the inverse machine pass a background-1 configuration; the roles of
    the symbols swap and the same invariant holds.
    """
    if cfg.head is None:
        return ContainmentReport(t_max, region or Region(0, 0, 0, 0),
                                 (region or Region(0, 0, 0, 0)).expand(1),
                                 None)
    if region is None:
        x0, x1, y0, y1 = cfg.bounding_box()
        region = Region(x0, x1, y0, y1)
    for v in cfg.ones:
        if not region.contains(v):
            raise ValueError("support must start inside the region")
    if not region.contains(cfg.head_pos):
        raise ValueError("head must start inside the region")
    expanded = region.expand(1)
    st = _RunState(machine, cfg)
    exit_time: Optional[int] = None
    heading_after_exit: Optional[str] = None
    inner = Region(expanded.xmin + 3, expanded.xmax - 3,
                   expanded.ymin + 3, expanded.ymax - 3) \
        if expanded.xmax - expanded.xmin >= 6 and \
        expanded.ymax - expanded.ymin >= 6 else None
    for t in range(1, t_max + 1):
        px, py = st.pos
        st.step()
        if exit_time is None and not expanded.contains(st.pos):
            exit_time = t
            heading_after_exit = st.state
        elif exit_time is not None:
            if st.state != heading_after_exit and st.state != "N*" \
                    and heading_after_exit != "N*":
                raise ViolationAt(t, "head turned after leaving the region")
            if st.state in DIRECTIONS:
                heading_after_exit = st.state
        # a step only rewrites cells near the old head position, so the
        # support scan is needed only when that neighborhood straddles
        # the boundary
        if inner is None or not inner.contains((px, py)):
            for dx in (-2, -1, 0, 1, 2):
                for dy in (-2, -1, 0, 1, 2):
                    v = (px + dx, py + dy)
                    if v in st.ones and not expanded.contains(v):
                        raise ViolationAt(t, f"symbol escaped to {v}")
    return ContainmentReport(t_max, region, expanded, exit_time)


def periodic_search(machine: TurmiteDef, cfg: SparseConfig,
                    T: int) -> Optional[int]:
    """Exact configuration recurrence within T steps, or None.

    Headless configurations report the trivial period 1.
    """
    if cfg.head is None:
        return 1
    st = _RunState(machine, cfg)
    start = (frozenset(st.ones), st.state, st.pos)
    seen = {start: 0}
    for t in range(1, T + 1):
        st.step()
        key = (frozenset(st.ones), st.state, st.pos)
        if key in seen:
            return t - seen[key]
        seen[key] = t
    return None


def kshape(a: int, b: int) -> SparseConfig:
    """The seven-arm configuration whose escape time grows cubically.

    At parameters (n, n) it fits in a square of side at most 7n and the
    head spends at least n^3 steps inside before escaping.
    """
    if a < 1 or b < 0:
        raise ValueError("need a >= 1, b >= 0")
    cells = set()
    for i in range(a):
        cells.add((-3 - i, 1 + i))                          # northwest arm
        cells.add((2 + 3 * i + 2 * b, i))                   # northeast arm
        cells.add((2 + 3 * i + 2 * b, -2 - i - 2 * b))      # southeast arm
        cells.add((2 + i + b, -4 - i - 2 * b - a))          # far southeast arm
        cells.add((0, -2 - i - 2 * b))                      # south arm
        cells.add((-3 - i, -4 - i - 2 * b - a))             # southwest arm
    for i in range(a + 1):
        cells.add((0, -1 + i))                              # north arm
    return SparseConfig(frozenset(cells), 0, ("E", (1, 0)))


def kshape_escape_time(machine: TurmiteDef, a: int, b: int,
                       cap: Optional[int] = None) -> tuple[int, Region]:
    """Escape time of the seven-arm family from its bounding rectangle."""
    cfg = kshape(a, b)
    x0, x1, y0, y1 = cfg.bounding_box()
    region = Region(x0, x1, y0, y1)
    if cap is None:
        cap = default_escape_cap(region.side)
    res = escape(machine, cfg, region, cap)
    return res.tau, region
