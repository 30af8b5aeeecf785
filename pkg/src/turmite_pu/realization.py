"""Concrete realizations of border processes.

The environment combines: an activated catcher system around the square
(the initial interceptor), one inactive system per round and reachable
entry (activated on demand by the traveling head), the network pattern
realizing the abstract process, and wiring that ferries the head between
interception points, activation anchors and network terminals.

Wires run on private rectangular "ring" tracks around the global
bounding box, entering and leaving the nest along free rays; their delay
trains are sized in a measurement pass so that the step count from the
first exit to the last entry is one constant plus the process's time
component, for every pattern and every admissible run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .borderproc import (BorderProcess, Mismatch, consistent_timing_table,
                         eval_border_process, term_in, term_out,
                         term_out_final)
from .catchers import (PlacedSystem, place_system, sendin_entry_col,
                       side_of_border)
from .core import Coord, SparseConfig, _RunState
from .dynamics import Region
from .gadgets import RoutingOverflow, compose_delay, materialize_train
from .layout import NetworkLayout, layout_network
from .machines import OPPOSITE, VEC, build_M
from .sautomata import Network

MIN_TOPUP = 30
RING_BASE = 12
RING_SPACING = 80
RING_GAP = 8


class BudgetExceeded(RuntimeError):
    def __init__(self, required: int, budget: int, message: str = ""):
        super().__init__(message or
                         f"realization needs ~{required} cells, "
                         f"budget {budget}")
        self.required = required
        self.budget = budget


@dataclass
class Pose:
    point: Coord
    direction: str


@dataclass
class RealWire:
    name: str
    start: Pose
    end: Optional[Pose]
    points: list[Coord]
    ones: set[Coord] = field(default_factory=set)
    corners: list[Coord] = field(default_factory=list)
    path: set[Coord] = field(default_factory=set)
    delay_slot: Optional[tuple[int, str]] = None   # (segment idx, direction)
    pad: int = 0
    delay_cells: set[Coord] = field(default_factory=set)


def _project(point: Coord, d: str, rect) -> Coord:
    x0, x1, y0, y1 = rect
    x, y = point
    return {"N": (x, y1), "S": (x, y0), "E": (x1, y), "W": (x0, y)}[d]


def _side_of(point: Coord, rect) -> str:
    x0, x1, y0, y1 = rect
    x, y = point
    if y == y1:
        return "top"
    if y == y0:
        return "bottom"
    if x == x1:
        return "right"
    if x == x0:
        return "left"
    raise AssertionError("point not on ring")


_CORNERS = ["bl", "br", "tr", "tl"]
_SIDE_SEQ = ["bottom", "right", "top", "left"]


def _ring_walk(p1: Coord, p2: Coord, rect) -> list[Coord]:
    """Waypoints along the ring rectangle from p1 to p2 (exclusive)."""
    x0, x1, y0, y1 = rect
    corner_pos = {"bl": (x0, y0), "br": (x1, y0),
                  "tr": (x1, y1), "tl": (x0, y1)}
    # perimeter parametrization, counterclockwise
    def param(p: Coord, side: str) -> float:
        x, y = p
        if side == "bottom":
            return (x - x0)
        if side == "right":
            return (x1 - x0) + (y - y0)
        if side == "top":
            return (x1 - x0) + (y1 - y0) + (x1 - x)
        return 2 * (x1 - x0) + (y1 - y0) + (y1 - y)

    total = 2 * (x1 - x0) + 2 * (y1 - y0)
    s1, s2 = _side_of(p1, rect), _side_of(p2, rect)
    t1, t2 = param(p1, s1), param(p2, s2)
    corner_params = {c: param(p, _side_of(p, rect))
                     for c, p in corner_pos.items()}
    # corners strictly between t1 and t2, in each direction
    def corners_between(a, b):
        out = []
        cur = a
        dist = (b - a) % total
        cs = sorted(corner_params.items(), key=lambda kv: (kv[1] - a) % total)
        for name, cp in cs:
            d = (cp - a) % total
            if 0 < d < dist:
                out.append((d, corner_pos[name]))
        out.sort()
        return [p for _, p in out]

    fwd = corners_between(t1, t2)
    bwd = list(reversed(corners_between(t2, t1)))
    return fwd, bwd


class RingRouter:
    """Allocates private rectangular tracks around the global box.

    ``safe_span`` is an x-interval crossed by no vertical traffic; delay
    trains are confined to it so that no other wire can run through
    their cells.
    """

    def __init__(self, box: tuple[int, int, int, int],
                 safe_span: Optional[tuple[int, int]] = None):
        self.box = box
        self.safe_span = safe_span
        self.track = 0

    def rect(self, t: int):
        x0, x1, y0, y1 = self.box
        off = RING_BASE + RING_SPACING * t
        return (x0 - off, x1 + off, y0 - off, y1 + off)

    def route(self, name: str, start: Pose, end: Pose) -> RealWire:
        from .gadgets import route_wire
        for attempt in range(4):
            t = self.track
            self.track += 1
            rect = self.rect(t)
            p1 = _project(start.point, start.direction, rect)
            p2 = _project(end.point, OPPOSITE[end.direction], rect)
            fwd, bwd = _ring_walk(p1, p2, rect)

            def assemble(walk):
                pts: list[Coord] = [start.point]
                for p in [p1, *walk, p2, end.point]:
                    if p != pts[-1]:
                        pts.append(p)
                cleaned = [pts[0]]
                for p in pts[1:]:
                    if len(cleaned) >= 2:
                        a, b = cleaned[-2], cleaned[-1]
                        if (a[0] == b[0] == p[0]) or \
                                (a[1] == b[1] == p[1]):
                            cleaned[-1] = p
                            continue
                    cleaned.append(p)
                return cleaned

            def covers(cleaned):
                if self.safe_span is None:
                    return True
                sx0, sx1 = self.safe_span
                for i, (a, b) in enumerate(zip(cleaned, cleaned[1:])):
                    if i in (0, len(cleaned) - 2) or a[1] != b[1]:
                        continue
                    if min(a[0], b[0]) <= sx0 and max(a[0], b[0]) >= sx1:
                        return True
                return False

            # prefer a walk whose interior passes over the protected span
            candidates = sorted((assemble(w) for w in (fwd, bwd)),
                                key=lambda c: (not covers(c), len(c)))
            cleaned = candidates[0]
            try:
                plan = route_wire(name, cleaned)
            except ValueError:
                continue  # degenerate geometry; take the next track
            wire = RealWire(name, start, end, cleaned,
                            ones=plan.ones, corners=plan.corners,
                            path=plan.path)
            # the delay train goes on an interior horizontal segment
            # covering the protected span (no vertical traffic there); the
            # first and last segments hug anchors and terminal rows
            nseg = len(cleaned) - 1
            for i, (a, b) in enumerate(zip(cleaned, cleaned[1:])):
                if i in (0, nseg - 1) or a[1] != b[1]:
                    continue
                lo, hi = min(a[0], b[0]), max(a[0], b[0])
                if self.safe_span and lo <= self.safe_span[0] \
                        and hi >= self.safe_span[1]:
                    wire.delay_slot = (i, "E" if b[0] > a[0] else "W",
                                       self.safe_span)
                    break
            return wire
        raise RoutingOverflow(f"could not route {name}")


def _apply_pad(wire: RealWire, box) -> None:
    if wire.pad == 0:
        wire.delay_cells = set()
        return
    if wire.delay_slot is None:
        raise RoutingOverflow(f"wire {wire.name} has no delay slot")
    i, d, (sx0, sx1) = wire.delay_slot
    a, b = wire.points[i], wire.points[i + 1]
    # detours must point away from the box interior: up on the top side,
    # down on the bottom; westbound trains are rotated, flipping them
    away = "up" if a[1] > (box[2] + box[3]) // 2 else "down"
    orient = away if d == "E" else ("down" if away == "up" else "up")
    segs = compose_delay(wire.pad, max_zig=60, orient=orient)
    width = sum(s.cols + 2 for s in segs)
    if width + 8 > sx1 - sx0:
        raise RoutingOverflow(f"delay {wire.pad} does not fit on "
                              f"wire {wire.name} ({width} cols)")
    start_col = sx0 + 4 if d == "E" else sx1 - 4
    cells, _, extra = materialize_train(segs, start_col, a[1],
                                        eastbound=(d == "E"))
    if extra != wire.pad:
        raise RoutingOverflow("delay train mismatch")
    wire.delay_cells = cells


@dataclass
class SystemPlan:
    key: str
    round: int                     # 0 for the initial system
    entry: Optional[Coord]         # the entry it delivers, None for C0
    placed: PlacedSystem
    activations: list[tuple[str, int]] = field(default_factory=list)


@dataclass
class TranscriptEntry:
    exit_time: int
    exit_coord: Coord
    entry_time: Optional[int]
    entry_coord: Optional[Coord]


@dataclass
class ConcreteRealization:
    """The assembled environment plus its verified timing constant."""

    n: int
    depth: int
    env: frozenset[Coord]
    bp: BorderProcess
    layout: NetworkLayout
    constant: Optional[int] = None
    transcripts: dict = field(default_factory=dict)

    def config_for(self, pattern: SparseConfig) -> SparseConfig:
        return SparseConfig(self.env | pattern.ones, 0, pattern.head)


def _simulate_rounds(machine, cfg: SparseConfig, n: int, depth: int,
                     pf_box, cap: int):
    """Run the full environment, recording square exits/entries and the
    times the head spends crossing the network pattern box."""
    st = _RunState(machine, cfg)
    sq = Region(0, n - 1, 0, n - 1)
    px0, px1, py0, py1 = pf_box
    rounds: list[TranscriptEntry] = []
    pf_spans: list[list[int]] = []
    inside_sq = sq.contains(st.pos)
    inside_pf = False
    prev_pos = st.pos
    cur: Optional[TranscriptEntry] = None
    for t in range(1, cap + 1):
        st.step()
        x, y = st.pos
        now_sq = 0 <= x < n and 0 <= y < n
        if now_sq and not inside_sq:
            if cur is not None:
                cur.entry_time = t
                cur.entry_coord = prev_pos
                cur = None
        elif inside_sq and not now_sq:
            cur = TranscriptEntry(t, (x, y), None, None)
            rounds.append(cur)
        inside_sq = now_sq
        now_pf = px0 <= x <= px1 and py0 <= y <= py1
        if now_pf and not inside_pf:
            pf_spans.append([t, None])
        elif inside_pf and not now_pf:
            pf_spans[-1][1] = t
        inside_pf = now_pf
        prev_pos = st.pos
        if len(rounds) == depth and rounds[-1].entry_time is not None:
            return rounds, pf_spans, st
    raise RoutingOverflow(f"simulation did not complete {depth} rounds "
                          f"within {cap} steps")


def build_concrete_realization(bp: BorderProcess, net: Network,
                               q0: Optional[dict] = None,
                               budget_cells: int = 2_000_000,
                               step_cap: int = 6_000_000
                               ) -> ConcreteRealization:
    """Assemble and verify a concrete realization of a border process.

    The network must be an abstract realization of the process over the
    reachable terminals (inputs i_j(b), outputs o_j(b) / o_k(b,t)).
    Verification replays each pattern through the environment, checks the
    exit/entry transcript against the process, and pins the clock:
    s_k - t_1 - t is asserted to be one constant.
    """
    machine = build_M()
    n, k = bp.n, bp.depth
    q0 = q0 or net.initial_state()

    # abstract trajectories and timing
    evals = {i: eval_border_process(bp, p, machine)
             for i, p in enumerate(bp.patterns)}
    dwell = consistent_timing_table(bp, machine)

    # reachable structure per round
    entries_per_round: dict[int, set] = {j: set() for j in range(1, k + 1)}
    finals: set[tuple[Coord, int]] = set()
    for res in evals.values():
        for j, rr in enumerate(res.rounds, start=1):
            entries_per_round[j].add(rr.entry_coord)
        finals.add((res.rounds[-1].entry_coord, res.time_component))

    # systems, innermost first: rounds descending, then C0 outermost
    plans: list[SystemPlan] = []
    near = n + 10
    for j in range(k, 0, -1):
        for b in sorted(entries_per_round[j]):
            ps = place_system(n, near)
            plans.append(SystemPlan(f"S{j}@{b}", j, b, ps))
            near += ps.depth + RING_GAP
    c0 = place_system(n, near)
    plans.append(SystemPlan("C0", 0, None, c0))
    nest_extent = near + c0.depth + RING_GAP

    # which catchers each system must activate before its send-in:
    # the responsibles of the *next* round's reachable exits, plus the
    # send-in catcher itself (minus what the processed catcher covers)
    exits_after: dict[tuple[int, Coord], set] = {}
    for res in evals.values():
        for j in range(1, k):
            key = (j, res.rounds[j - 1].entry_coord)
            exits_after.setdefault(key, set()).add(
                res.rounds[j].exit_coord)
    for plan in plans:
        if plan.round == 0 or plan.entry is None:
            continue
        side_b, lat_b = side_of_border(plan.entry, n)
        arr = plan.placed.array(side_b)
        a_send = arr.sendin_catcher(lat_b)
        acts: list[tuple[str, int]] = []
        for e in sorted(exits_after.get((plan.round, plan.entry), set())):
            side_e, lat_e = side_of_border(e, n)
            if side_e == side_b and lat_e in (lat_b, lat_b - 1):
                continue  # the processed send-in catcher covers these
            a_resp = plan.placed.array(side_e).responsible(lat_e)
            if side_e == side_b and a_resp == arr.skip_catcher(lat_b):
                continue  # must stay inactive; covered by the send catcher
            if (side_e, a_resp) not in acts:
                acts.append((side_e, a_resp))
        acts.append((side_b, a_send))
        plan.activations = acts

    # the network pattern, placed to the northeast of the nest
    layout = layout_network(net, name="process-net")
    pf_x = nest_extent + 800
    pf_y = nest_extent + 40
    pf_box = (pf_x, pf_x + layout.width - 1, pf_y, pf_y + layout.height - 1)

    required = nest_extent * 40 + layout.width * layout.height // 4
    if required > budget_cells:
        raise BudgetExceeded(required, budget_cells)

    gx0, gx1 = -nest_extent, pf_box[1]
    gy0, gy1 = -nest_extent, pf_box[3]
    router = RingRouter((gx0, gx1, gy0, gy1),
                        safe_span=(nest_extent + 12, pf_x - 20))
    wires: dict[str, RealWire] = {}

    def pf_in_pose(name: str) -> Pose:
        tx, ty = layout.terminals[name]
        return Pose((pf_x + tx, pf_y + ty), "E")

    def pf_out_pose(name: str) -> Pose:
        for nm, (tx, ty) in layout.terminals.items():
            if nm == name:
                return Pose((pf_x + tx, pf_y + ty), "E")
        raise KeyError(name)

    def add_wire(name: str, start: Pose, end: Pose):
        wires[name] = router.route(name, start, end)

    # interception pickups: from each system that intercepts round j's
    # exit, to the network input i_j(b_exit)
    def pickup_pose(plan: SystemPlan, exit_b: Coord) -> Pose:
        side_e, lat_e = side_of_border(exit_b, n)
        arr = plan.placed.array(side_e)
        state = "activated"
        a = arr.responsible(lat_e)
        if plan.round > 0 and plan.entry is not None:
            side_b, lat_b = side_of_border(plan.entry, n)
            if side_e == side_b and lat_e in (lat_b, lat_b - 1):
                a = arr.sendin_catcher(lat_b)
                state = "processed"
        cat = arr.catcher(a)
        from .catchers import interception_fly_col
        lat_local = arr._local_lateral(lat_e)
        col_local = interception_fly_col(a, n + 1, lat_local, state)
        pt = cat.to_abs((col_local, lat_local))
        return Pose(pt, cat.dir_abs("N"))

    plan_by_key = {p.key: p for p in plans}
    plan_of_round: dict[tuple[int, Optional[Coord]], SystemPlan] = {}
    for p in plans:
        plan_of_round[(p.round, p.entry)] = p

    pickup_keys: set[tuple[int, str, Coord]] = set()
    for res in evals.values():
        prev_plan = plan_by_key["C0"]
        for j, rr in enumerate(res.rounds, start=1):
            keyname = f"pick:{j}:{prev_plan.key}:{rr.exit_coord}"
            if keyname not in wires:
                add_wire(keyname, pickup_pose(prev_plan, rr.exit_coord),
                         pf_in_pose(term_in(j, rr.exit_coord)))
                pickup_keys.add((j, prev_plan.key, rr.exit_coord))
            if j < k:
                prev_plan = plan_of_round[(j, rr.entry_coord)]

    # delivery chains: network output -> activation hops -> send-in anchor
    from .catchers import activation_entry, activation_exit
    band = n + 1

    def anchor_entry(plan: SystemPlan, side: str, a: int) -> Pose:
        cat = plan.placed.array(side).catcher(a)
        p, d = activation_entry(a, band)
        return Pose(cat.to_abs(p), cat.dir_abs(d))

    def anchor_exit(plan: SystemPlan, side: str, a: int) -> Pose:
        cat = plan.placed.array(side).catcher(a)
        p, d = activation_exit(a, band)
        return Pose(cat.to_abs(p), cat.dir_abs(d))

    def sendin_pose(plan: SystemPlan) -> Pose:
        side_b, lat_b = side_of_border(plan.entry, n)
        arr = plan.placed.array(side_b)
        a = arr.sendin_catcher(lat_b)
        cat = arr.catcher(a)
        pt = cat.to_abs((sendin_entry_col(a, band), band + 2))
        return Pose(pt, cat.dir_abs("S"))

    for plan in plans:
        if plan.round == 0:
            continue
        j, b = plan.round, plan.entry
        if j < k:
            outs = [term_out(j, b)]
        else:
            outs = [term_out_final(k, b, t) for (bb, t) in finals if bb == b]
        for out_name in outs:
            cur = pf_out_pose(out_name)
            for h, (side, a) in enumerate(plan.activations):
                nm = f"tour:{plan.key}:{out_name}:{h}"
                add_wire(nm, cur, anchor_entry(plan, side, a))
                cur = anchor_exit(plan, side, a)
            add_wire(f"tour:{plan.key}:{out_name}:send", cur,
                     sendin_pose(plan))

    # --- assemble and verify --------------------------------------------

    def assemble() -> frozenset[Coord]:
        owner: dict[Coord, str] = {}

        def put(cell, who):
            if cell in owner and owner[cell] != who:
                raise RoutingOverflow(f"cell {cell} claimed by "
                                      f"{owner[cell]} and {who}")
            owner[cell] = who

        for plan in plans:
            state = "activated" if plan.round == 0 else "inactive"
            for c in plan.placed.cells(state):
                put(c, plan.key)
        for (gx, gy) in layout.ones:
            put((pf_x + gx, pf_y + gy), "pf")
        for w in wires.values():
            for c in w.ones | w.delay_cells:
                put(c, w.name)
        # wire paths must stay clear of foreign wire cells
        wire_cells = {c: o for c, o in owner.items()
                      if o.startswith(("pick:", "tour:"))}
        for w in wires.values():
            for (px, py) in w.path:
                for dx in (-1, 0, 1):
                    for dy in (-1, 0, 1):
                        who = wire_cells.get((px + dx, py + dy))
                        if who is not None and who != w.name:
                            raise RoutingOverflow(
                                f"{w.name} touches {who} near {(px, py)}")
        return frozenset(owner)

    def measure(env: frozenset[Coord]):
        recs = {}
        for i, p in enumerate(bp.patterns):
            cfg = SparseConfig(env | p.ones, 0, p.head)
            rounds, pf_spans, _ = _simulate_rounds(machine, cfg, n, k,
                                                    pf_box, step_cap)
            recs[i] = (rounds, pf_spans)
        return recs

    env = assemble()
    recs = measure(env)

    # sanity: the physical exits match the abstract process
    for i, res in evals.items():
        rounds, _ = recs[i]
        for j, rr in enumerate(res.rounds):
            sb, _l = side_of_border(rr.exit_coord, n)
            phys = rounds[j].exit_coord
            if phys != _exit_border_cell(rr.exit_coord, n):
                raise Mismatch(
                    f"pattern {i} round {j+1}: physical exit cell {phys} "
                    f"does not match abstract {rr.exit_coord}")

    # leg decomposition: pickup raw times and per-chain delivery raw times
    pick_raw: dict[str, int] = {}
    deliver_raw: dict[str, dict[int, int]] = {}
    deliver_t: dict[str, int] = {}
    for i, res in evals.items():
        rounds, pf_spans = recs[i]
        prev_key = "C0"
        for j, rr in enumerate(res.rounds, start=1):
            enter_pf, exit_pf = pf_spans[j - 1]
            pick = f"pick:{j}:{prev_key}:{rr.exit_coord}"
            pick_raw[pick] = enter_pf - rounds[j - 1].exit_time
            plan = plan_of_round[(j, rr.entry_coord)]
            t = res.time_component if j == k else 0
            out_name = (term_out(j, rr.entry_coord) if j < k
                        else term_out_final(k, rr.entry_coord, t))
            send = f"tour:{plan.key}:{out_name}:send"
            deliver_raw.setdefault(send, {})[i] = \
                rounds[j - 1].entry_time - exit_pf
            deliver_t[send] = t
            if j < k:
                prev_key = plan.key

    # pickup pads: C_j - dwell - raw; C_j from the observed maxima
    need_c: dict[int, int] = {}
    pick_dwell: dict[str, int] = {}
    for i, res in evals.items():
        entry = None
        for j, rr in enumerate(res.rounds, start=1):
            prev_key = "C0" if j == 1 else \
                plan_of_round[(j - 1, res.rounds[j - 2].entry_coord)].key
            pick = f"pick:{j}:{prev_key}:{rr.exit_coord}"
            # the dwell preceding round 1's exit happens before the clock
            # starts; only inter-round dwells are cancelled by the pads
            d = 0 if j == 1 else dwell[(j, entry, rr.exit_coord)]
            pick_dwell[pick] = d
            need_c[j] = max(need_c.get(j, 0), pick_raw[pick] + d)
            entry = rr.entry_coord
    for pick, raw in pick_raw.items():
        j = int(pick.split(":")[1])
        wires[pick].pad = need_c[j] + MIN_TOPUP - pick_dwell[pick] - raw

    # delivery pads: D_j + t - raw, one per delivery chain (placed on its
    # send hop); the chain's raw time must be pattern-independent
    need_d: dict[int, int] = {}
    for send, per_pat in deliver_raw.items():
        vals = set(per_pat.values())
        if len(vals) != 1:
            raise Mismatch(f"delivery {send} time varies by pattern: "
                           f"{per_pat}")
        raw = vals.pop()
        deliver_raw[send] = raw
        j = int(send.split(":")[1].lstrip("S").split("@")[0])
        need_d[j] = max(need_d.get(j, 0), raw - deliver_t[send])
    for send, raw in deliver_raw.items():
        j = int(send.split(":")[1].lstrip("S").split("@")[0])
        t = deliver_t[send]
        wires[send].pad = need_d[j] + MIN_TOPUP + t - raw

    for w in wires.values():
        if w.pad < 0:
            raise RoutingOverflow(f"negative pad on {w.name}: {w.pad}")
        _apply_pad(w, (gx0, gx1, gy0, gy1))

    env = assemble()
    out = ConcreteRealization(n, k, env, bp, layout)

    # final verification: transcript matches f and the clock is constant
    constants = set()
    for i, p in enumerate(bp.patterns):
        res = evals[i]
        rounds, _, _ = _simulate_rounds(
            machine, SparseConfig(env | p.ones, 0, p.head),
            n, k, pf_box, step_cap)
        for j, rr in enumerate(res.rounds):
            if rounds[j].exit_coord != _exit_border_cell(rr.exit_coord, n):
                raise Mismatch(f"pattern {i}: exit {j+1} mismatch")
        c = rounds[-1].entry_time - rounds[0].exit_time \
            - res.time_component
        constants.add(c)
        out.transcripts[i] = rounds
    if len(constants) != 1:
        raise Mismatch(f"clock constant differs across patterns: "
                       f"{constants}")
    out.constant = constants.pop()
    return out


def _exit_border_cell(b: Coord, n: int) -> Coord:
    return b
