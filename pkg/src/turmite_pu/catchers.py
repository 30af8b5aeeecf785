"""Catchers: activable patterns that intercept an escaping head.

A catcher is described in the west-side frame, where it sits to the west
of the square [0,n-1]^2 and its middle rows align with the square's rows.
The other three orientations are rotations.  An inactive catcher is
transparent on its middle rows; activating it (a spiral run that pulls
four bits inward) arms it to intercept a head leaving the square on its
designated row and redirect it perpendicular to the array, where wiring
can pick it up.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .core import Coord, SparseConfig, TurmiteDef, _RunState
from .machines import build_M

GAP_TO_SQUARE = 2     # empty columns between the square and the first catcher
GAP_BETWEEN = 2       # empty columns between adjacent catchers in an array


class ObstructionDetected(RuntimeError):
    """A catcher run deviated from its expected trajectory."""


_M: Optional[TurmiteDef] = None


def _machine() -> TurmiteDef:
    global _M
    if _M is None:
        _M = build_M()
    return _M


def catcher_cells(a: int, n: int) -> frozenset[Coord]:
    """Inactive west catcher in its local frame [0,2a+9] x [-a-3,n+1].

    The exit pin sits on row -1: the activation spiral contracts one row
    per loop and always makes its final eastbound run on row -1, where it
    must step onto the pin to be deflected out through the south border.
    (For a = 1 this is the same cell as the (2a+8, -a) of the published
    description, which is the only depicted instance; for larger a the
    published row would leave the pin short of the spiral's final run.)
    """
    if a < 1 or n < 1:
        raise ValueError("need a >= 1, n >= 1")
    return frozenset([
        (0, -a - 2), (3, -a - 3), (3, -a - 2), (3, n + 1),
        (2 * a + 6, -a - 3), (2 * a + 6, n + 1), (2 * a + 8, -1),
    ])


def catcher_shape(a: int, n: int) -> tuple[int, int, int, int]:
    """(xmin, xmax, ymin, ymax) of the local pattern shape."""
    return 0, 2 * a + 9, -a - 3, n + 1


# local feature anchors (west frame); all verified by simulation
def activation_entry(a: int, n: int) -> tuple[Coord, str]:
    return (0, -a - 4), "N"


def activation_exit(a: int, n: int) -> tuple[Coord, str]:
    return (2 * a + 8, -a - 4), "S"


@lru_cache(maxsize=None)
def interception_fly_col(a: int, n: int, row_local: int,
                         state: str = "activated") -> int:
    """Column on which an intercepted westbound head flies off northward.

    Measured by simulation: a head is sent westbound on the given local
    row against the catcher in the given state; the northbound turn
    column is recorded.  Raises ObstructionDetected when the catcher does
    not intercept that row in that state.
    """
    cells = {"activated": catcher_activated_cells,
             "processed": catcher_processed_cells}[state](a, n)
    M = _machine()
    x0, x1, y0, y1 = catcher_shape(a, n)
    st = _RunState(M, SparseConfig(frozenset(cells), 0,
                                   ("W", (x1 + 3, row_local))))
    for t in range(1, 40 * (a + n + 8) ** 2):
        st.step()
        x, y = st.pos
        if st.state in ("N", "N*") and y > y1 + 1:
            return x
        if x < x0 - 1 or y < y0 - 1 or (st.state == "W" and x < x0):
            raise ObstructionDetected(
                f"({a},{n}) {state}: row {row_local} not intercepted")
    raise ObstructionDetected("interception run did not terminate")


def sendin_entry_col(a: int, n: int) -> int:
    return 2 * a + 7


@lru_cache(maxsize=None)
def _catcher_runs(a: int, n: int):
    """Simulate activation and send-in processing once, locally.

    Returns (activated cells, activation steps, processed cells after the
    send-in pass, send-in steps, send-in exit).  The runs start and end
    on the feature anchors; any deviation raises ObstructionDetected.
    """
    M = _machine()
    base = catcher_cells(a, n)
    x0, x1, y0, y1 = catcher_shape(a, n)

    def run_until_leaves(cells, head):
        st = _RunState(M, SparseConfig(frozenset(cells), 0, head))
        inside_once = False
        for t in range(1, 40 * (a + n + 8) ** 2):
            st.step()
            x, y = st.pos
            inside = x0 <= x <= x1 and y0 - 1 <= y <= y1 + 1
            if inside:
                inside_once = True
            elif inside_once:
                return t, st.freeze()
        raise ObstructionDetected("catcher run did not terminate")

    t_act, out = run_until_leaves(base, ("N", activation_entry(a, n)[0]))
    exp_col = activation_exit(a, n)[0][0]
    if out.head_pos[0] != exp_col or out.head_state != "S":
        raise ObstructionDetected(
            f"activation of ({a},{n}) exited at {out.head} "
            f"instead of column {exp_col} southbound")
    activated = out.ones

    t_send, out2 = run_until_leaves(
        activated, ("S", (sendin_entry_col(a, n), n + 2)))
    if out2.head_state != "E" or out2.head_pos[1] != n - a:
        raise ObstructionDetected(
            f"send-in pass of ({a},{n}) exited at {out2.head}, "
            f"expected eastbound on row {n - a}")
    processed = out2.ones
    return activated, t_act, processed, t_send, out2.head


def catcher_activated_cells(a: int, n: int) -> frozenset[Coord]:
    return _catcher_runs(a, n)[0]


def catcher_processed_cells(a: int, n: int) -> frozenset[Coord]:
    """Cells after activation plus the send-in pass."""
    return _catcher_runs(a, n)[2]


def activation_steps(a: int, n: int) -> int:
    return _catcher_runs(a, n)[1]


def sendin_steps(a: int, n: int) -> int:
    return _catcher_runs(a, n)[3]


def activate(config: SparseConfig, a: int, n: int,
             origin: Coord = (0, 0)) -> tuple[SparseConfig, int]:
    """Activate a west catcher embedded at ``origin`` in a configuration.

    The head is sent in through the south border on the westmost column;
    returns the configuration after the head has left the pattern (still
    carrying the head, southbound below the east end) and the step count.
    """
    M = _machine()
    ox, oy = origin
    entry, d = activation_entry(a, n)
    st = _RunState(M, config.with_head(d, (ox + entry[0], oy + entry[1])))
    x0, x1, y0, y1 = catcher_shape(a, n)
    inside_once = False
    for t in range(1, 40 * (a + n + 8) ** 2):
        st.step()
        x, y = st.pos
        inside = (ox + x0 <= x <= ox + x1
                  and oy + y0 - 1 <= y <= oy + y1 + 1)
        if inside:
            inside_once = True
        elif inside_once:
            out = st.freeze()
            want = activation_exit(a, n)[0][0] + ox
            if out.head_pos[0] != want or out.head_state != "S":
                raise ObstructionDetected(
                    f"activation exited at {out.head}, expected column "
                    f"{want} southbound")
            return out, t
    raise ObstructionDetected("activation did not terminate")


# ---------------------------------------------------------------------------
# orientation transforms

SIDES = ("west", "north", "east", "south")

# linear parts mapping the west frame onto each side; all keep the middle
# band aligned with the square's rows or columns
_LINEAR = {
    "west": lambda x, y: (x, y),
    "north": lambda x, y: (y, -x),
    "east": lambda x, y: (-x, -y),
    "south": lambda x, y: (-y, x),
}

_DIR_ORDER = {"N": (0, 1), "E": (1, 0), "S": (0, -1), "W": (-1, 0)}


def _map_dir(side: str, d: str) -> str:
    vx, vy = _DIR_ORDER[d]
    wx, wy = _LINEAR[side](vx, vy)
    for name, v in _DIR_ORDER.items():
        if v == (wx, wy):
            return name
    raise AssertionError


@dataclass(frozen=True)
class PlacedCatcher:
    """One catcher of an array, with its absolute placement transform."""

    a: int
    n: int
    side: str
    shift: Coord   # absolute position of local (0, 0)

    def to_abs(self, p: Coord) -> Coord:
        lx, ly = self.shift
        x, y = _LINEAR[self.side](p[0], p[1])
        return (x + lx, y + ly)

    def dir_abs(self, d: str) -> str:
        return _map_dir(self.side, d)

    def cells(self, state: str = "inactive") -> frozenset[Coord]:
        local = {
            "inactive": catcher_cells,
            "activated": catcher_activated_cells,
            "processed": catcher_processed_cells,
        }[state](self.a, self.n)
        return frozenset(self.to_abs(p) for p in local)


@dataclass(frozen=True)
class PlacedArray:
    """A full catcher array on one side of the square [0,n-1]^2.

    The catchers are cut for a band one lane wider than the square
    (local lateral 0 is a buffer lane that never carries traffic): the
    square's lateral lines 0..n-1 map to local rows 1..n, so a send-in
    never has to deliver on the catcher's local row 0, which would jam on
    the debris the send-in pass drops one row below.
    """

    n: int
    side: str
    catchers: tuple[PlacedCatcher, ...]   # indexed by a-1
    near: int                             # clearance used on the square side
    depth: int                            # total extent away from the square

    def catcher(self, a: int) -> PlacedCatcher:
        return self.catchers[a - 1]

    def _local_lateral(self, lateral: int) -> int:
        if not (0 <= lateral < self.n):
            raise ValueError("lateral index outside the middle band")
        if self.side in ("east", "south"):
            return self.n - lateral
        return lateral + 1

    def responsible(self, lateral: int) -> int:
        """Which catcher intercepts an outbound head at the given lateral
        coordinate (absolute row for west/east, column for north/south)."""
        return self.n + 1 - self._local_lateral(lateral)

    def sendin_catcher(self, lateral: int) -> int:
        """The catcher whose send-in pass delivers the head on the given
        lateral line, entering the square from this side."""
        return self.n + 1 - self._local_lateral(lateral)

    def skip_catcher(self, lateral: int) -> Optional[int]:
        """The catcher that must stay inactive for that send-in to pass."""
        a = self.sendin_catcher(lateral) + 1
        return a if a <= self.n else None


def place_array(n: int, side: str, near: int) -> PlacedArray:
    """Stack catchers a = n (nearest) down to 1, ``near`` cells from the
    square, on the given side; each is an (a, n+1)-catcher whose lateral
    band covers the square's lines plus the buffer lane."""
    placed = {}
    cur = near  # distance from the square to the near edge of next catcher
    band = n + 1
    for a in range(n, 0, -1):
        x0, x1, y0, y1 = catcher_shape(a, band)
        # local x = x1 is the near edge; local lateral 1..n covers the
        # square's lines, so the lateral shift is -1 (or n on the flipped
        # sides, where local 1 lands on line n-1)
        if side == "west":
            shift = (-1 - cur - x1, -1)
        elif side == "east":
            shift = (n + cur + x1, n)
        elif side == "north":
            shift = (-1, n + cur + x1)
        else:  # south
            shift = (n, -1 - cur - x1)
        placed[a] = PlacedCatcher(a, band, side, shift)
        cur += (x1 + 1) + GAP_BETWEEN
    return PlacedArray(n, side,
                       tuple(placed[a] for a in range(1, n + 1)),
                       near, cur - GAP_BETWEEN)


@dataclass(frozen=True)
class PlacedSystem:
    """Four arrays around the square, sharing one clearance ring."""

    n: int
    near: int
    arrays: dict

    @property
    def depth(self) -> int:
        return max(arr.depth for arr in self.arrays.values())

    def array(self, side: str) -> PlacedArray:
        return self.arrays[side]

    def cells(self, state: str = "inactive",
              skip: Optional[tuple[str, int]] = None) -> frozenset[Coord]:
        out = set()
        for side, arr in self.arrays.items():
            for c in arr.catchers:
                st = state
                if skip is not None and (side, c.a) == skip:
                    st = "inactive"
                out |= c.cells(st)
        return frozenset(out)


def place_system(n: int, near: int) -> PlacedSystem:
    return PlacedSystem(n, near,
                        {side: place_array(n, side, near) for side in SIDES})


def side_of_border(b: Coord, n: int) -> tuple[str, int]:
    """Which side of [0,n-1]^2 a border coordinate lies on, plus its
    lateral index (absolute row or column)."""
    x, y = b
    if x == -1 and 0 <= y < n:
        return "west", y
    if x == n and 0 <= y < n:
        return "east", y
    if y == -1 and 0 <= x < n:
        return "south", x
    if y == n and 0 <= x < n:
        return "north", x
    raise ValueError(f"{b} is not on the border of [0,{n-1}]^2")


def inward_direction(b: Coord, n: int) -> str:
    side, _ = side_of_border(b, n)
    return {"west": "E", "east": "W", "south": "N", "north": "S"}[side]


def full_activate_array(n: int, side: str = "west",
                        near: int = GAP_TO_SQUARE) -> SparseConfig:
    """An array with every catcher activated, as a static pattern."""
    arr = place_array(n, side, near)
    cells = set()
    for c in arr.catchers:
        cells |= c.cells("activated")
    return SparseConfig(frozenset(cells))


def partial_activate(n: int, entry: int, side: str = "west",
                     near: int = GAP_TO_SQUARE):
    """Activate an array so a head can be sent to the square on ``entry``.

    Every catcher is activated except the one just inside the send-in
    catcher (whose middle bits would deflect the send-in pass); the head
    is then dropped at the send-in catcher's outer edge and guided onto
    the requested lateral line.  Returns (configuration with the head
    about to enter the square, send-in catcher index, skipped index).
    """
    arr = place_array(n, side, near)
    a_send = arr.sendin_catcher(entry)
    skip = arr.skip_catcher(entry)
    M = _machine()
    cells: set[Coord] = set()
    for c in arr.catchers:
        state = "inactive" if (skip is not None and c.a == skip) \
            else "activated"
        cells |= c.cells(state)
    cat = arr.catcher(a_send)
    pos = cat.to_abs((sendin_entry_col(a_send, n + 1), n + 1 + 2))
    st = _RunState(M, SparseConfig(frozenset(cells), 0,
                                   (cat.dir_abs("S"), pos)))
    for _ in range(200_000):
        st.step()
        x, y = st.pos
        if 0 <= x < n and 0 <= y < n:
            out = st.freeze()
            want = {"west": (0, entry), "east": (n - 1, entry),
                    "north": (entry, n - 1), "south": (entry, 0)}[side]
            if (x, y) != want:
                raise ObstructionDetected(
                    f"send-in reached {(x, y)}, wanted {want}")
            return out, a_send, skip
    raise ObstructionDetected("send-in never reached the square")


def catcher(a: int, n: int, orientation: str = "west") -> SparseConfig:
    """A single inactive catcher pattern in the given orientation,
    anchored so its middle band aligns with [0, n-1] laterally."""
    if orientation == "west":
        return SparseConfig(catcher_cells(a, n))
    pc = PlacedCatcher(a, n, orientation, (0, 0))
    return SparseConfig(pc.cells("inactive"))


def catcher_array(n: int, orientation: str = "west",
                  near: int = GAP_TO_SQUARE) -> SparseConfig:
    """A full inactive array beside the square [0, n-1]^2."""
    arr = place_array(n, orientation, near)
    cells = set()
    for c in arr.catchers:
        cells |= c.cells("inactive")
    return SparseConfig(frozenset(cells))


def catcher_system(n: int, near: int = GAP_TO_SQUARE) -> SparseConfig:
    """Four inactive arrays around the square [0, n-1]^2."""
    return SparseConfig(place_system(n, near).cells("inactive"))
