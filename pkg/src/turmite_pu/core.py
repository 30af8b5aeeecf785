"""Sparse configurations and a generic table-driven turmite engine.

The tape is an infinite binary plane stored sparsely: only cells whose
symbol differs from the background are kept.  A machine is a total rule
table over (state, local patch) pairs; both the moving-head and the
moving-tape dynamics are derived from the same table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

Coord = tuple[int, int]

# Coordinates and step counters must stay within signed 64-bit range; a
# silent wraparound in a port of this engine would corrupt timing claims,
# so the bound is enforced rather than assumed.
INT64_MAX = 2**63 - 1


class NonInjectiveRule(ValueError):
    """Raised when a rule table cannot be inverted."""


class HeadRequired(ValueError):
    """Raised by operations that need a head-carrying configuration."""


def _check_int64(*values: int) -> None:
    for v in values:
        if v > INT64_MAX or v < -INT64_MAX - 1:
            raise OverflowError(f"coordinate/step {v} exceeds 64-bit range")


@dataclass(frozen=True)
class SparseConfig:
    """A tape of finite support plus an optional head.

    ``ones`` lists exactly the cells whose symbol differs from
    ``background`` (so for background 1 it lists the cells holding 0).
    ``head`` is a (state, position) pair or None; headless configurations
    are fixed points of the moving-head dynamics.
    """

    ones: frozenset[Coord] = frozenset()
    background: int = 0
    head: Optional[tuple[str, Coord]] = None

    def __post_init__(self) -> None:
        if self.background not in (0, 1):
            raise ValueError("background must be 0 or 1")

    def symbol(self, v: Coord) -> int:
        return self.background ^ (1 if v in self.ones else 0)

    @property
    def head_state(self) -> str:
        if self.head is None:
            raise HeadRequired("configuration has no head")
        return self.head[0]

    @property
    def head_pos(self) -> Coord:
        if self.head is None:
            raise HeadRequired("configuration has no head")
        return self.head[1]

    def with_head(self, state: str, pos: Coord) -> "SparseConfig":
        return SparseConfig(self.ones, self.background, (state, pos))

    def without_head(self) -> "SparseConfig":
        return SparseConfig(self.ones, self.background, None)

    def translate(self, d: Coord) -> "SparseConfig":
        dx, dy = d
        ones = frozenset((x + dx, y + dy) for x, y in self.ones)
        head = None
        if self.head is not None:
            q, (x, y) = self.head
            head = (q, (x + dx, y + dy))
        return SparseConfig(ones, self.background, head)

    def bounding_box(self) -> tuple[int, int, int, int]:
        """(xmin, xmax, ymin, ymax) over support and head; requires either."""
        pts = list(self.ones)
        if self.head is not None:
            pts.append(self.head[1])
        if not pts:
            raise ValueError("empty configuration has no bounding box")
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        return min(xs), max(xs), min(ys), max(ys)

    def key(self) -> tuple:
        """Hashable snapshot used for orbit/recurrence comparisons."""
        return (self.ones, self.background, self.head)


@dataclass(frozen=True)
class MovingTapeConfig:
    """Moving-tape state: internal state plus a headless tape.

    The head sits implicitly at the origin; the tape shifts under it.
    """

    state: str
    tape: SparseConfig

    def __post_init__(self) -> None:
        if self.tape.head is not None:
            raise ValueError("moving-tape tape must be headless")


def from_rows(rows: Iterable[str], *, background: int = 0,
              head: Optional[tuple[str, Coord]] = None,
              origin: Coord = (0, 0)) -> SparseConfig:
    """Build a config from text rows (top row first, y decreasing).

    Characters: '1'/'0' are symbols, '.' is background.
    """
    grid = list(rows)
    ox, oy = origin
    ones = set()
    h = len(grid)
    for r, row in enumerate(grid):
        y = oy + (h - 1 - r)
        for c, ch in enumerate(row):
            if ch == ".":
                continue
            if ch not in "01":
                raise ValueError(f"bad cell character {ch!r}")
            if int(ch) != background:
                ones.add((ox + c, y))
    return SparseConfig(frozenset(ones), background, head)


@dataclass(frozen=True)
class TurmiteDef:
    """A generalized turmite as an explicit total rule table.

    For state q the machine reads and rewrites the window
    ``anchor[q] + offsets`` around the head, then moves by the rule's
    move vector.  Patches are bitmasks aligned with ``offsets``.
    The per-state anchor is what lets inverted machines stay radius-r:
    the inverse of a rule that moved by w reads the window shifted by -w.
    """

    name: str
    states: tuple[str, ...]
    radius: int
    offsets: tuple[Coord, ...]
    anchors: Mapping[str, Coord]
    table: Mapping[tuple[str, int], tuple[str, int, Coord]]
    _windows: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        expected = len(self.states) * (1 << len(self.offsets))
        if len(self.table) != expected:
            raise ValueError(
                f"rule table must be total: {len(self.table)} != {expected}")
        for q in self.states:
            ax, ay = self.anchors[q]
            self._windows[q] = tuple((ax + ox, ay + oy) for ox, oy in self.offsets)
        for (q, bits), (p, bits2, (mx, my)) in self.table.items():
            if p not in self.states:
                raise ValueError(f"rule target state {p!r} unknown")
            if not (abs(mx) <= 2 * self.radius and abs(my) <= 2 * self.radius):
                raise ValueError("move vector outside neighborhood")

    def window(self, q: str) -> tuple[Coord, ...]:
        return self._windows[q]

    def check_injective(self) -> bool:
        """True iff (state, patch) -> (state', patch') is injective."""
        seen = set()
        for (q, bits), (p, bits2, move) in self.table.items():
            key = (p, bits2)
            if key in seen:
                return False
            seen.add(key)
        return True


def default_offsets(radius: int) -> tuple[Coord, ...]:
    return tuple((x, y) for x in range(-radius, radius + 1)
                 for y in range(-radius, radius + 1))


def patch_bits(cfg: SparseConfig, cells: Iterable[Coord]) -> int:
    bits = 0
    ones = cfg.ones
    bg = cfg.background
    for i, v in enumerate(cells):
        if (v in ones) != (bg == 1):
            # symbol 1 at v
            bits |= 1 << i
    return bits


class _RunState:
    """Mutable simulation state for tight inner loops."""

    __slots__ = ("ones", "background", "state", "pos", "machine")

    def __init__(self, machine: TurmiteDef, cfg: SparseConfig):
        if cfg.head is None:
            raise HeadRequired("simulation state needs a head")
        self.machine = machine
        self.ones = set(cfg.ones)
        self.background = cfg.background
        self.state, self.pos = cfg.head

    def step(self) -> Coord:
        """Advance one step; returns the move vector taken."""
        m = self.machine
        q = self.state
        x, y = self.pos
        ones = self.ones
        bg1 = self.background == 1
        bits = 0
        i = 1
        window = m.window(q)
        for ox, oy in window:
            if ((x + ox, y + oy) in ones) != bg1:
                bits |= i
            i <<= 1
        p, bits2, (mx, my) = m.table[(q, bits)]
        if bits2 != bits:
            delta = bits ^ bits2
            i = 0
            while delta:
                if delta & 1:
                    v = (x + window[i][0], y + window[i][1])
                    if v in ones:
                        ones.discard(v)
                    else:
                        ones.add(v)
                i += 1
                delta >>= 1
        self.state = p
        self.pos = (x + mx, y + my)
        return (mx, my)

    def freeze(self) -> SparseConfig:
        return SparseConfig(frozenset(self.ones), self.background,
                            (self.state, self.pos))


def step_head(machine: TurmiteDef, cfg: SparseConfig) -> SparseConfig:
    """One moving-head step; headless configurations are fixed points."""
    if cfg.head is None:
        return cfg
    st = _RunState(machine, cfg)
    st.step()
    return st.freeze()


def step_tape(machine: TurmiteDef, cfg: MovingTapeConfig) -> MovingTapeConfig:
    """One moving-tape step: head step re-centered to the origin."""
    embedded = cfg.tape.with_head(cfg.state, (0, 0))
    st = _RunState(machine, embedded)
    mx, my = st.step()
    out = st.freeze().translate((-mx, -my))
    return MovingTapeConfig(out.head_state, out.without_head())


def run(machine: TurmiteDef, cfg, t: int):
    """t-fold composition of the single step, in either model."""
    if t < 0:
        raise ValueError("step count must be nonnegative")
    _check_int64(t)
    if isinstance(cfg, MovingTapeConfig):
        embedded = cfg.tape.with_head(cfg.state, (0, 0))
        out = run(machine, embedded, t)
        q, pos = out.head
        return MovingTapeConfig(q, out.translate((-pos[0], -pos[1])).without_head())
    if cfg.head is None:
        return cfg
    st = _RunState(machine, cfg)
    for _ in range(t):
        st.step()
        _check_int64(st.pos[0], st.pos[1])
    return st.freeze()


def invert(machine: TurmiteDef) -> TurmiteDef:
    """Invert a rule table.

    A rule that read window anchor_q and moved by w is undone by reading
    the same cells from the new position, i.e. window anchor_q - w, so
    all rules into a state must agree on anchor_q - w (they may move
    differently).  Raises NonInjectiveRule when the table is not a
    bijection on (state, patch) pairs or the windows cannot be aligned.
    """
    anchors = {}
    for (q, bits), (p, bits2, w) in machine.table.items():
        aq = machine.anchors[q]
        cand = (aq[0] - w[0], aq[1] - w[1])
        if p in anchors and anchors[p] != cand:
            raise NonInjectiveRule(
                f"rules into state {p!r} disagree on read window")
        anchors[p] = cand
    for q in machine.states:
        anchors.setdefault(q, (0, 0))
    inv_table: dict[tuple[str, int], tuple[str, int, Coord]] = {}
    for (q, bits), (p, bits2, (wx, wy)) in machine.table.items():
        key = (p, bits2)
        if key in inv_table:
            raise NonInjectiveRule(
                f"two rules share the image (state={p!r}, patch={bits2:#x})")
        inv_table[key] = (q, bits, (-wx, -wy))
    return TurmiteDef(
        name=machine.name + "^-1" if not machine.name.endswith("^-1")
        else machine.name[:-3],
        states=machine.states,
        radius=machine.radius,
        offsets=machine.offsets,
        anchors=anchors,
        table=inv_table,
    )


@dataclass(frozen=True)
class BorderSet:
    """The outer border of the box [0,m-1] x [0,n-1]."""

    m: int
    n: int
    coords: frozenset[Coord]


def outer_border(m: int, n: int) -> BorderSet:
    if m < 1 or n < 1:
        raise ValueError("border needs positive side lengths")
    coords = set()
    for y in range(n):
        coords.add((-1, y))
        coords.add((m, y))
    for x in range(m):
        coords.add((x, -1))
        coords.add((x, n))
    return BorderSet(m, n, frozenset(coords))


@dataclass(frozen=True)
class OrbitCollision:
    i: int
    j: int
    t: int
    s: int


def disjoint_orbits(machine: TurmiteDef, patterns: list[SparseConfig],
                    background: int, horizon: int):
    """Semi-decide disjointness of the padded forward orbits.

    Returns "disjoint-up-to-T" or an OrbitCollision.  Configurations are
    compared for equality, not up to translation.  A verdict of
    disjointness is only valid up to the horizon.
    """
    for p in patterns:
        if p.head is None:
            raise HeadRequired("orbit patterns must contain the head")
        if p.background != background:
            raise ValueError("pattern background mismatch")
    seen: dict[tuple, tuple[int, int]] = {}
    for i, p in enumerate(patterns):
        st = _RunState(machine, p)
        for t in range(horizon + 1):
            key = (frozenset(st.ones), st.state, st.pos)
            if key in seen:
                j, s = seen[key]
                if j != i:
                    return OrbitCollision(j, i, s, t)
            else:
                seen[key] = (i, t)
            if t < horizon:
                st.step()
    return "disjoint-up-to-T"
