"""Layered circuit recovering a pattern and its escape time.

Given head-patterns with disjoint 0-orbits, the escaped window contents
determine the original pattern: the circuit runs the reverse machine one
layer per step (as a cellwise update), tests each layer for membership in
the padded pattern set, and latches the first hit together with its layer
index.

The reverse step is built from the machine's three phases: the counter
toggle and the backward head move are pure wire routing; only the
diagonal rewrite needs gates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .circuits import BoolCircuit, _CB, evaluate
from .core import SparseConfig, TurmiteDef, _RunState, disjoint_orbits
from .dynamics import EscapeResult, Region, escape
from .machines import (DIRECTIONS, LEFT, N, N_STAR, OPPOSITE, RIGHT, VEC,
                       build_M)

STATE_ORDER = (N, N_STAR, "E", "S", "W")
CELL_WIRES = len(STATE_ORDER) + 2  # head one-hot incl. headless, plus tape


class OrbitOverlap(ValueError):
    """The pattern set's padded orbits collide within the horizon."""


def _fwd_right(d: str) -> tuple[int, int]:
    fx, fy = VEC[d]
    rx, ry = VEC[RIGHT[d]]
    return (fx + rx, fy + ry)


def _back_right(d: str) -> tuple[int, int]:
    bx, by = VEC[OPPOSITE[d]]
    rx, ry = VEC[RIGHT[d]]
    return (bx + rx, by + ry)


@dataclass
class InverseSimCircuit:
    """The recovery circuit plus its window geometry and codecs."""

    circuit: BoolCircuit
    m: int
    r: int
    T: int
    tau_bits: int

    @property
    def window(self) -> list[tuple[int, int]]:
        lo, hi = -self.r, self.m - 1 + self.r
        return [(x, y) for x in range(lo, hi + 1) for y in range(lo, hi + 1)]

    @property
    def core(self) -> list[tuple[int, int]]:
        return [(x, y) for x in range(self.m) for y in range(self.m)]

    def encode_window(self, cfg: SparseConfig) -> list[int]:
        """Window contents as input bits (head one-hot + tape per cell)."""
        bits: list[int] = []
        for v in self.window:
            q = cfg.head[0] if (cfg.head and cfg.head[1] == v) else None
            for s in STATE_ORDER:
                bits.append(1 if q == s else 0)
            bits.append(1 if q is None else 0)   # headless marker
            bits.append(cfg.symbol(v))
        return bits

    def decode_outputs(self, bits: Sequence[int]) -> tuple[SparseConfig, int]:
        ones = set()
        head = None
        idx = 0
        for v in self.core:
            for s in STATE_ORDER:
                if bits[idx]:
                    head = (s, v)
                idx += 1
            idx += 1  # headless marker
            if bits[idx]:
                ones.add(v)
            idx += 1
        tau = 0
        for b in range(self.tau_bits):
            tau |= bits[idx] << b
            idx += 1
        return SparseConfig(frozenset(ones), 0, head), tau

    def run(self, escaped_window: SparseConfig) -> tuple[SparseConfig, int]:
        out = evaluate(self.circuit, self.encode_window(escaped_window))
        return self.decode_outputs(out)


def escape_window(machine: TurmiteDef, pattern: SparseConfig, m: int,
                  r: int = 1) -> tuple[SparseConfig, int]:
    """Forward-simulate to the first exit from [0,m-1]^2 and restrict to
    the radius-extended window (the circuit's input)."""
    res: EscapeResult = escape(machine, pattern, Region(0, m - 1, 0, m - 1))
    cfg = res.exit_config
    lo, hi = -r, m - 1 + r
    ones = frozenset(v for v in cfg.ones
                     if lo <= v[0] <= hi and lo <= v[1] <= hi)
    return SparseConfig(ones, 0, cfg.head), res.tau


def inverse_simulation_circuit(patterns: Sequence[SparseConfig], m: int,
                               r: int = 1, T: int | None = None,
                               machine: TurmiteDef | None = None
                               ) -> InverseSimCircuit:
    """Build the layered recovery circuit for the given pattern set.

    ``patterns`` must carry the head within [0,m-1]^2 and have disjoint
    0-orbits (checked up to the horizon actually used; a collision raises
    OrbitOverlap since recovery would be ill-posed).
    """
    machine = machine or build_M()
    if r != machine.radius:
        raise ValueError("radius must match the machine")
    taus = []
    for p in patterns:
        if p.head is None or not (0 <= p.head[1][0] < m
                                  and 0 <= p.head[1][1] < m):
            raise ValueError("patterns must carry the head inside the box")
        taus.append(escape_window(machine, p, m, r)[1])
    if T is None:
        T = max(taus)
    verdict = disjoint_orbits(machine, list(patterns), 0, T)
    if verdict != "disjoint-up-to-T":
        raise OrbitOverlap(f"orbit collision: {verdict}")

    lo, hi = -r, m - 1 + r
    window = [(x, y) for x in range(lo, hi + 1) for y in range(lo, hi + 1)]
    inside = set(window)

    names = []
    for v in window:
        for s in STATE_ORDER:
            names.append(f"c{v[0]}_{v[1]}.{s}")
        names.append(f"c{v[0]}_{v[1]}.none")
        names.append(f"c{v[0]}_{v[1]}.t")
    cb = _CB(names)

    def cellmap(fn) -> dict:
        return {v: fn(v) for v in window}

    h = {s: {} for s in STATE_ORDER}
    none_w = {}
    t = {}
    idx = 0
    for v in window:
        for s in STATE_ORDER:
            h[s][v] = names[idx]
            idx += 1
        none_w[v] = names[idx]
        idx += 1
        t[v] = names[idx]
        idx += 1

    def backward_layer(h, none_w, t):
        z = cb.const0()
        # counter toggle: pure relabeling
        h = dict(h)
        h[N], h[N_STAR] = h[N_STAR], h[N]

        # backward move: state q at v came from v + vec(q)
        h2 = {s: {} for s in STATE_ORDER}
        for v in window:
            for q in DIRECTIONS:
                u = (v[0] + VEC[q][0], v[1] + VEC[q][1])
                h2[q][v] = h[q][u] if u in inside else z
            h2[N_STAR][v] = h[N_STAR][v]

        def tape(v):
            return t[v] if v in inside else z

        # rewrite predicates per cell and state
        pull = {q: {} for q in DIRECTIONS}
        push = {q: {} for q in DIRECTIONS}
        for v in window:
            for q in DIRECTIONS:
                f, rr = VEC[q], VEC[RIGHT[q]]
                b = VEC[OPPOSITE[q]]
                fr = (v[0] + f[0] + rr[0], v[1] + f[1] + rr[1])
                br = (v[0] + b[0] + rr[0], v[1] + b[1] + rr[1])
                fv = (v[0] + f[0], v[1] + f[1])
                rv = (v[0] + rr[0], v[1] + rr[1])
                bv = (v[0] + b[0], v[1] + b[1])
                pull[q][v] = cb.AND_list([
                    h2[q][v], cb.NOT(tape(v)), tape(fr),
                    cb.EQ(tape(fv), tape(rv))])
                push[q][v] = cb.AND_list([
                    h2[q][v], tape(v), cb.NOT(tape(br)),
                    cb.EQ(tape(bv), tape(rv))])

        h3 = {s: {} for s in STATE_ORDER}
        none3 = {}
        t3 = {}
        for v in window:
            flips = []
            for q in DIRECTIONS:
                flips.append(pull[q][v])
                flips.append(push[q][v])
                fr = _fwd_right(q)
                br = _back_right(q)
                u = (v[0] - fr[0], v[1] - fr[1])
                if u in inside:
                    flips.append(pull[q][u])
                u = (v[0] - br[0], v[1] - br[1])
                if u in inside:
                    flips.append(push[q][u])
            t3[v] = cb.XOR(t[v], cb.OR_list(flips))
            for p in DIRECTIONS:
                terms = [cb.AND_list([h2[p][v], cb.NOT(pull[p][v]),
                                      cb.NOT(push[p][v])])]
                for q in DIRECTIONS:
                    if LEFT[q] == p:
                        terms.append(pull[q][v])
                    if RIGHT[q] == p:
                        terms.append(push[q][v])
                h3[p][v] = cb.OR_list(terms)
            h3[N_STAR][v] = h2[N_STAR][v]
            none3[v] = cb.NOT(cb.OR_list([h3[s][v] for s in STATE_ORDER]))
        return h3, none3, t3

    # membership patterns: the originals padded with headless zeros
    core = [(x, y) for x in range(m) for y in range(m)]

    def membership(h, none_w, t) -> str:
        hits = []
        for p in patterns:
            lits = []
            for v in window:
                q = p.head[0] if p.head[1] == v else None
                if q is None:
                    lits.append(none_w[v])
                else:
                    lits.append(h[q][v])
                bit = p.symbol(v) if v in core or True else 0
                lits.append(t[v] if bit else cb.NOT(t[v]))
            hits.append(cb.AND_list(lits))
        return cb.OR_list(hits)

    tau_bits = max(1, (T).bit_length())
    seen = cb.const0()
    acc = {}
    for v in core:
        for s in STATE_ORDER:
            acc[(v, s)] = cb.const0()
        acc[(v, "none")] = cb.const0()
        acc[(v, "t")] = cb.const0()
    acc_tau = [cb.const0() for _ in range(tau_bits)]

    for layer in range(1, T + 1):
        h, none_w, t = backward_layer(h, none_w, t)
        hit = membership(h, none_w, t)
        first = cb.AND(hit, cb.NOT(seen))
        seen = cb.OR(seen, hit)
        for v in core:
            for s in STATE_ORDER:
                acc[(v, s)] = cb.OR(acc[(v, s)], cb.AND(first, h[s][v]))
            acc[(v, "none")] = cb.OR(acc[(v, "none")],
                                     cb.AND(first, none_w[v]))
            acc[(v, "t")] = cb.OR(acc[(v, "t")], cb.AND(first, t[v]))
        for b in range(tau_bits):
            if (layer >> b) & 1:
                acc_tau[b] = cb.OR(acc_tau[b], first)

    outputs = []
    for v in core:
        for s in STATE_ORDER:
            outputs.append(acc[(v, s)])
        outputs.append(acc[(v, "none")])
        outputs.append(acc[(v, "t")])
    outputs.extend(acc_tau)
    return InverseSimCircuit(cb.build(outputs), m, r, T, tau_bits)
