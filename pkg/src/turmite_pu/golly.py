"""Rule-table export of a two-phase square root of the 4-state machine.

One machine step splits into a rewrite phase and a move phase; the
exported cellular-automaton rule performs one phase per generation,
marking the head as "cocked" in between.  Applying the table twice
therefore agrees with one machine step on embedded configurations, which
an in-repo table interpreter verifies; the file also loads into the
usual external simulator.
"""

from __future__ import annotations

from dataclasses import dataclass
from .core import SparseConfig
from .machines import DIRECTIONS, LEFT, OPPOSITE, RIGHT, VEC

RULE_NAME = "TurmitePUHalf"

# Moore neighborhood order used by rule tables
NEIGHBORHOOD = ((0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1),
                (-1, 0), (-1, 1))


class UnsupportedMachine(ValueError):
    pass


def head_state(q: str, tape: int, primed: bool) -> int:
    return 2 + DIRECTIONS.index(q) * 4 + tape * 2 + (1 if primed else 0)


def decode_state(s: int):
    """(tape, head) where head is None or (direction, primed)."""
    if s in (0, 1):
        return s, None
    s -= 2
    q = DIRECTIONS[s // 4]
    tape = (s % 4) // 2
    primed = bool(s % 2)
    return tape, (q, primed)


def _fwd_right(d: str):
    f, r = VEC[d], VEC[RIGHT[d]]
    return (f[0] + r[0], f[1] + r[1])


def _back_right(d: str):
    b, r = VEC[OPPOSITE[d]], VEC[RIGHT[d]]
    return (b[0] + r[0], b[1] + r[1])


def _neg(v):
    return (-v[0], -v[1])


def export_golly_rule(machine_name: str = "barM") -> str:
    """Emit the @RULE table text.

    Only the 4-state machine is supported; the table is its two-phase
    square root, deterministic and byte-stable.
    """
    if machine_name not in ("barM", "barM-halfstep"):
        raise UnsupportedMachine(
            f"rule export supports the 4-state machine, not {machine_name}")
    lines = [
        f"@RULE {RULE_NAME}",
        "",
        "@TABLE",
        "n_states:18",
        "neighborhood:Moore",
        "symmetries:none",
        "",
        "var aa={" + ",".join(str(i) for i in range(18)) + "}",
        "var ab={aa}", "var ac={aa}", "var ad={aa}", "var ae={aa}",
        "var af={aa}", "var ag={aa}", "var ah={aa}",
        "var ta={0,1}",
        "var tb={0,1}",
    ]
    for q in DIRECTIONS:
        lines.append("var p" + q.lower() + "={"
                     + f"{head_state(q, 0, True)},{head_state(q, 1, True)}"
                     + "}")
    lines.append("")

    def trans(center, cells: dict, out) -> str:
        """One table line: center, 8 neighbors in order, new center."""
        row = [str(center)]
        spare = iter(["aa", "ab", "ac", "ad", "ae", "af", "ag", "ah"])
        for off in NEIGHBORHOOD:
            row.append(str(cells.get(off, next(spare))))
        row.append(str(out))
        return ",".join(row)

    lines.append("# rewrite phase: the head fires and cocks")
    for q in DIRECTIONS:
        f, r = VEC[q], VEC[RIGHT[q]]
        b = VEC[OPPOSITE[q]]
        lines.append(trans(
            head_state(q, 0, False),
            {_fwd_right(q): 1, f: "ta", r: "ta"},
            head_state(LEFT[q], 1, True)))
        lines.append(trans(
            head_state(q, 1, False),
            {_back_right(q): 0, b: "ta", r: "ta"},
            head_state(RIGHT[q], 0, True)))
    for q in DIRECTIONS:
        for t in (0, 1):
            lines.append(trans(head_state(q, t, False), {},
                               head_state(q, t, True)))
    lines.append("")
    lines.append("# rewrite phase: the moved bit, seen from its cell")
    for q in DIRECTIONS:
        f, r = VEC[q], VEC[RIGHT[q]]
        b = VEC[OPPOSITE[q]]
        lines.append(trans(
            1,
            {_neg(_fwd_right(q)): head_state(q, 0, False),
             _neg(r): "ta", _neg(f): "ta"},
            0))
        lines.append(trans(
            0,
            {_neg(_back_right(q)): head_state(q, 1, False),
             _neg(r): "ta", _neg(b): "ta"},
            1))
    lines.append("")
    lines.append("# move phase: the cocked head leaves and lands")
    for q in DIRECTIONS:
        for t in (0, 1):
            lines.append(trans(head_state(q, t, True), {}, t))
    for q in DIRECTIONS:
        lines.append(trans(
            "ta", {_neg(VEC[q]): "p" + q.lower()},
            head_state(q, 0, False) if False else "HEADLAND_" + q))
    out = []
    for ln in lines:
        if "HEADLAND_" in ln:
            q = ln.rsplit("_", 1)[1]
            # the landing head keeps the cell's tape bit: encode the two
            # tape cases separately since the head state fuses both
            for t in (0, 1):
                cells = {_neg(VEC[q]): "p" + q.lower()}
                row = [str(t)]
                spare = iter(["aa", "ab", "ac", "ad", "ae", "af", "ag",
                              "ah"])
                for off in NEIGHBORHOOD:
                    row.append(str(cells.get(off, next(spare))))
                row.append(str(head_state(q, t, False)))
                out.append(",".join(row))
        else:
            out.append(ln)
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# independent table interpreter

@dataclass
class _Transition:
    cells: tuple    # 9 entries: center then neighbors; int or var name
    out: object     # int or var name


class RuleTable:
    """A rule-table interpreter for Moore tables without symmetries.

    Transitions are tried in order; variables repeated within one
    transition must bind one value.  Unmatched cells keep their state.
    """

    def __init__(self, text: str):
        self.n_states = 0
        self.vars: dict[str, tuple[int, ...]] = {}
        self.transitions: list[_Transition] = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line or line.startswith(("@", "neighborhood",
                                            "symmetries")):
                if line.startswith("neighborhood") and "Moore" not in line:
                    raise ValueError("only Moore tables are supported")
                continue
            if line.startswith("n_states:"):
                self.n_states = int(line.split(":")[1])
            elif line.startswith("var "):
                name, body = line[4:].split("=", 1)
                body = body.strip().strip("{}")
                vals: list[int] = []
                for item in body.split(","):
                    item = item.strip()
                    if item.isdigit():
                        vals.append(int(item))
                    else:
                        vals.extend(self.vars[item])
                self.vars[name.strip()] = tuple(sorted(set(vals)))
            else:
                parts = [p.strip() for p in line.split(",")]
                if len(parts) != 10:
                    raise ValueError(f"bad transition: {line}")
                cells = tuple(int(p) if p.isdigit() else p
                              for p in parts[:9])
                outp = parts[9]
                self.transitions.append(
                    _Transition(cells, int(outp) if outp.isdigit()
                                else outp))

    def _match(self, tr: _Transition, states: tuple[int, ...]):
        binding: dict[str, int] = {}
        for want, got in zip(tr.cells, states):
            if isinstance(want, int):
                if want != got:
                    return None
            else:
                dom = self.vars[want]
                if got not in dom:
                    return None
                if want in binding and binding[want] != got:
                    return None
                binding[want] = got
        if isinstance(tr.out, int):
            return tr.out
        return binding[tr.out]

    def step(self, grid: dict) -> dict:
        active = set(grid)
        for (x, y) in list(grid):
            for dx, dy in NEIGHBORHOOD:
                active.add((x + dx, y + dy))
        out: dict = {}
        for cell in active:
            x, y = cell
            states = (grid.get(cell, 0),) + tuple(
                grid.get((x + dx, y + dy), 0) for dx, dy in NEIGHBORHOOD)
            new = states[0]
            for tr in self.transitions:
                got = self._match(tr, states)
                if got is not None:
                    new = got
                    break
            if new:
                out[cell] = new
        return out


def embed(cfg: SparseConfig) -> dict:
    """Configuration to rule-table grid (background 0 only)."""
    if cfg.background != 0:
        raise ValueError("embedding assumes background 0")
    grid = {c: 1 for c in cfg.ones}
    if cfg.head is not None:
        q, pos = cfg.head
        if q not in DIRECTIONS:
            raise UnsupportedMachine("only plain-direction heads embed")
        grid[pos] = head_state(q, cfg.symbol(pos), False)
    return grid


def extract(grid: dict) -> SparseConfig:
    ones = set()
    head = None
    for cell, s in grid.items():
        tape, h = decode_state(s)
        if tape:
            ones.add(cell)
        if h is not None:
            if h[1]:
                raise ValueError("head is mid-step (cocked)")
            if head is not None:
                raise ValueError("two heads in grid")
            head = (h[0], cell)
    return SparseConfig(frozenset(ones), 0, head)
