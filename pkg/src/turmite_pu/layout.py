"""Whole-network tape layout with exact, equalized wire timing.

Components stack in one column; every wire is an axis-aligned corridor
with its own lanes and a private delay area, topped up so that all wires
take exactly the same number of steps.  A transition of weight w then
takes e*(w+1) + c*w steps: w+1 wires plus w component traversals.

The geometry is deliberately loose (structures keep Chebyshev distance at
least 2 or 3 apart); every build is checked for spacing violations and
the caller is expected to verify words by simulation afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .core import Coord
from .gadgets import (GADGET_FACTORIES, GADGET_WEIGHT_FACTOR, Mismatch,
                      RoutingOverflow, TapeSimulation, WirePlan,
                      compose_delay, materialize_train, route_wire,
                      verify_simulation)
from .sautomata import Network

MIN_TOPUP = 30          # every wire gets at least this much delay headroom
COMPONENT_GAP = 12
BAND_SPACING = 16
EXIT_SPACING = 16
ENTRY_SPACING = 4
LANE_SPACING = 4


@dataclass
class WireRecord:
    name: str
    kind: str                    # "in" | "conn" | "out"
    plan: WirePlan
    delay: int = 0
    train: tuple = ()


@dataclass
class LayoutManifest:
    """Placement and timing summary emitted alongside a layout."""

    component_pos: dict[str, tuple[int, int]]
    wire_delay: dict[str, int]
    e: int
    c: int
    width: int
    height: int
    terminals: dict = field(default_factory=dict)

    def text(self) -> str:
        lines = [f"layout {self.width}x{self.height} e={self.e} c={self.c}",
                 f"  timing F(w) = {self.e}*(w+1) + {self.c}*w"]
        for t, (x, y) in sorted(self.terminals.items()):
            lines.append(f"  terminal {t} at ({x},{y})")
        for p, (x, y) in sorted(self.component_pos.items()):
            lines.append(f"  comp {p} at ({x},{y})")
        for w, d in sorted(self.wire_delay.items()):
            lines.append(f"  wire {w} delay {d}")
        return "\n".join(lines) + "\n"


@dataclass
class NetworkLayout(TapeSimulation):
    """A TapeSimulation realizing a whole normed network."""

    e: int = 0
    manifest: Optional[LayoutManifest] = None
    wires: list = field(default_factory=list)

    def timing(self, weight) -> int:
        w = int(weight)
        return self.e * (w + 1) + self.c * w


def _gadget_cache() -> dict[str, TapeSimulation]:
    if not hasattr(_gadget_cache, "cache"):
        _gadget_cache.cache = {k: f() for k, f in GADGET_FACTORIES.items()}
    return _gadget_cache.cache


def layout_network(net: Network, name: str = "layout") -> NetworkLayout:
    """Compile a normed network over the primitive components to tape.

    Raises RoutingOverflow when the delay budget or spacing rules cannot
    be met (the geometry then needs to be widened; this triggers only on
    pathological inputs since fields are sized iteratively).
    """
    gads = _gadget_cache()
    comps = sorted(net.components)
    for p in comps:
        if net.components[p].name not in gads:
            raise ValueError(f"component {p} ({net.components[p].name}) "
                             "is not a primitive")
        if net.initial[p] not in ("a", ((0,), 0)):
            raise ValueError(f"component {p} must start in its fresh state")

    in_wires = sorted(net.ext_in)
    conn_wires = sorted(net.wires.items())
    out_wires = sorted(net.ext_out.items())
    loop_count = len(in_wires) + len(conn_wires)
    total = loop_count + len(out_wires)

    gheight = max(g.height for g in gads.values())
    gwidth = max(g.width for g in gads.values())
    V = gheight + COMPONENT_GAP
    Y = {p: 4 + i * V for i, p in enumerate(comps)}
    stack_top = 4 + len(comps) * V

    yo = {nm: stack_top + 8 + EXIT_SPACING * j
          for j, (_, nm) in enumerate(out_wires)}
    ent_base = stack_top + 8 + EXIT_SPACING * max(1, len(out_wires)) + 8
    ent = {nm: ent_base + ENTRY_SPACING * j
           for j, nm in enumerate(in_wires)}
    band_base = ent_base + ENTRY_SPACING * max(1, len(in_wires)) + 14
    bands = [band_base + BAND_SPACING * j for j in range(loop_count)]
    height = bands[-1] + 14 if bands else ent_base + 20

    odfw = 80
    dfw = 80
    for _attempt in range(24):
        xw = [4 + LANE_SPACING * j for j in range(max(1, loop_count))]
        df0 = xw[-1] + 8
        xc = df0 + dfw + 8
        xe = [xc + gwidth + 4 + LANE_SPACING * j for j in range(max(1, total))]
        odf0 = xe[-1] + 6
        width = odf0 + odfw + 6

        records: list[WireRecord] = []
        lane_loop = 0
        lane_all = 0

        def in_row(path: str, term: str) -> int:
            g = gads[net.components[path].name]
            return Y[path] + g.terminals[term][1]

        def out_exit(path: str, term: str) -> tuple[int, int]:
            g = gads[net.components[path].name]
            return (xc + g.width, Y[path] + g.terminals[term][1])

        for nm in in_wires:
            p, t = net.ext_in[nm]
            yt = in_row(p, t)
            pts = [(-1, ent[nm]), (xe[lane_all], ent[nm]),
                   (xe[lane_all], bands[lane_loop]),
                   (xw[lane_loop], bands[lane_loop]),
                   (xw[lane_loop], yt), (xc - 1, yt)]
            records.append(WireRecord(f"in:{nm}", "in",
                                      route_wire(f"in:{nm}", pts)))
            lane_loop += 1
            lane_all += 1
        for (src, dst) in conn_wires:
            (sp, so), (dp, di) = src, dst
            xs, ys = out_exit(sp, so)
            yt = in_row(dp, di)
            pts = [(xs, ys), (xe[lane_all], ys),
                   (xe[lane_all], bands[lane_loop]),
                   (xw[lane_loop], bands[lane_loop]),
                   (xw[lane_loop], yt), (xc - 1, yt)]
            wn = f"conn:{sp}.{so}->{dp}.{di}"
            records.append(WireRecord(wn, "conn", route_wire(wn, pts)))
            lane_loop += 1
            lane_all += 1
        for (src, nm) in out_wires:
            (sp, so) = src
            xs, ys = out_exit(sp, so)
            pts = [(xs, ys), (xe[lane_all], ys),
                   (xe[lane_all], yo[nm]), (width, yo[nm])]
            records.append(WireRecord(f"out:{nm}", "out",
                                      route_wire(f"out:{nm}", pts)))
            lane_all += 1

        e = max(r.plan.raw_time for r in records) + MIN_TOPUP
        fits = True
        for r in records:
            r.delay = e - r.plan.raw_time
            r.train = tuple(compose_delay(r.delay))
            need = sum(s.cols + 2 for s in r.train) + 8
            if r.kind == "out":
                if need > odfw:
                    odfw = need + 16
                    fits = False
            else:
                if need > dfw:
                    dfw = need + 16
                    fits = False
        if fits:
            break
    else:
        raise RoutingOverflow("delay fields failed to converge")

    # materialize delay trains
    band_of = {}
    j = 0
    for r in records:
        if r.kind != "out":
            band_of[r.name] = bands[j]
            j += 1
    for r in records:
        if r.kind == "out":
            row = yo[r.name.split(":", 1)[1]]
            cells, _, extra = materialize_train(r.train, odf0 + 2, row,
                                                eastbound=True)
        else:
            row = band_of[r.name]
            cells, _, extra = materialize_train(r.train, df0 + dfw - 8, row,
                                                eastbound=False)
        if extra != r.delay:
            raise RoutingOverflow(f"wire {r.name}: train gives {extra}, "
                                  f"need {r.delay}")
        r.plan.delay_cells = cells
        r.plan.delay_extra = extra

    # assemble cells with ownership and check spacing
    owner: dict[Coord, str] = {}

    def put(cell: Coord, who: str):
        if cell in owner and owner[cell] != who:
            raise RoutingOverflow(f"cell {cell} claimed by {owner[cell]} "
                                  f"and {who}")
        owner[cell] = who

    gadget_cells: set[Coord] = set()
    gadget_boxes: dict[str, tuple[int, int, int, int]] = {}
    for p in comps:
        g = gads[net.components[p].name]
        for (gx, gy) in g.ones:
            cell = (xc + gx, Y[p] + gy)
            put(cell, f"gadget:{p}")
            gadget_cells.add(cell)
        gadget_boxes[p] = (xc, xc + g.width - 1, Y[p], Y[p] + g.height - 1)
    for r in records:
        for cell in r.plan.ones | r.plan.delay_cells:
            put(cell, r.name)

    # spacing: no wire path cell may touch a foreign wire's 1, enter a
    # gadget box, or come within 3 cells of a foreign corner
    wire_ones: dict[Coord, str] = {c: o for c, o in owner.items()
                                   if not o.startswith("gadget:")}
    for r in records:
        for (px, py) in r.plan.path:
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    who = wire_ones.get((px + dx, py + dy))
                    if who is not None and who != r.name:
                        raise RoutingOverflow(
                            f"{r.name} path at {(px, py)} touches {who}")
            for p, (x0, x1, y0, y1) in gadget_boxes.items():
                if x0 <= px <= x1 and y0 <= py <= y1:
                    raise RoutingOverflow(
                        f"{r.name} path enters gadget {p}")
    corner_list = [(r.name, c) for r in records for c in r.plan.corners]
    for r in records:
        for (who, (cx, cy)) in corner_list:
            if who == r.name:
                continue
            for (px, py) in r.plan.path:
                if abs(px - cx) <= 2 and abs(py - cy) <= 2:
                    raise RoutingOverflow(
                        f"{r.name} passes within 2 of corner of {who}")

    ones = frozenset(owner)
    terminals = {}
    for nm in in_wires:
        terminals[nm] = (-1, ent[nm])
    for (_, nm) in out_wires:
        terminals[nm] = (width, yo[nm])

    manifest = LayoutManifest(
        component_pos={p: (xc, Y[p]) for p in comps},
        wire_delay={r.name: r.delay for r in records},
        e=e, c=GADGET_WEIGHT_FACTOR, width=width, height=height,
        terminals=dict(terminals))

    layout = NetworkLayout(
        name=name, width=width, height=height, ones=ones,
        terminals=terminals, behavior=net, initial=net.initial_state(),
        letter_time=lambda w: e * (int(w) + 1)
        + GADGET_WEIGHT_FACTOR * int(w),
        c=GADGET_WEIGHT_FACTOR, e=e, manifest=manifest, wires=records)
    return layout


def all_defined_words(net: Network, max_len: int) -> list[tuple]:
    """Every word the network accepts, up to the length bound."""
    words = []
    stack = [(net.initial_state(), ())]
    while stack:
        state, word = stack.pop()
        if word:
            words.append(word)
        if len(word) >= max_len:
            continue
        for letter in sorted(net.ext_in):
            try:
                nxt, _, _ = net.step(state, letter)
            except Exception:
                continue
            stack.append((nxt, word + (letter,)))
    return words


def verify_layout(layout: NetworkLayout,
                  words: Optional[Sequence[Sequence[str]]] = None,
                  max_len: int = 3) -> int:
    """Simulate words on the laid-out tape against the network semantics.

    Checks exit terminals and per-letter step counts e*(w+1)+c*w exactly;
    returns the number of letters verified.
    """
    if words is None:
        words = all_defined_words(layout.behavior, max_len)
    return verify_simulation(layout, words)
