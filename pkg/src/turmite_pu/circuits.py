"""Boolean circuits, normalization, and the circuit-to-network compiler.

Circuits use unbounded-fanin AND, unary NOT and two-way SPLIT gates over
named wires.  Normalization rewrites to binary ANDs and fanout one (via
splitter trees), after which each wire becomes one bit-latching switch in
the compiled token network.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .sautomata import (MERGE_INITIAL, SWITCH_INITIAL, Network, RunResult,
                        disposable_merge, disposable_switch, run_network_word,
                        trivial_merge)

AND, NOT, SPLIT = "AND", "NOT", "SPLIT"


class CyclicCircuit(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    name: str
    kind: str
    args: tuple[str, ...]

    def out_wires(self) -> tuple[str, ...]:
        if self.kind == SPLIT:
            return (self.name + ".0", self.name + ".1")
        return (self.name,)


@dataclass(frozen=True)
class BoolCircuit:
    """A DAG of gates over named wires.

    ``inputs`` and ``outputs`` are wire names; a SPLIT gate g drives the
    wires g.0 and g.1, any other gate drives the wire carrying its name.
    """

    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    gates: tuple[Gate, ...]

    def __post_init__(self):
        drivers = set(self.inputs)
        for g in self.gates:
            for w in g.out_wires():
                if w in drivers:
                    raise ValueError(f"wire {w!r} has two drivers")
                drivers.add(w)
        for g in self.gates:
            if g.kind == AND and len(g.args) < 1:
                raise ValueError("AND needs at least one argument")
            if g.kind in (NOT, SPLIT) and len(g.args) != 1:
                raise ValueError(f"{g.kind} is unary")
        for w in self.outputs:
            if w not in drivers:
                raise ValueError(f"output wire {w!r} undriven")

    @property
    def k_in(self) -> int:
        return len(self.inputs)

    @property
    def k_out(self) -> int:
        return len(self.outputs)

    @property
    def size(self) -> int:
        return len(self.gates)

    def topo_gates(self) -> tuple[Gate, ...]:
        """Gates sorted by (depth, insertion index); raises on cycles."""
        producer: dict[str, int] = {}
        for idx, g in enumerate(self.gates):
            for w in g.out_wires():
                producer[w] = idx
        depth: dict[int, int] = {}
        visiting: set[int] = set()

        def gate_depth(idx: int) -> int:
            if idx in depth:
                return depth[idx]
            if idx in visiting:
                raise CyclicCircuit("circuit contains a cycle")
            visiting.add(idx)
            d = 0
            for a in self.gates[idx].args:
                if a in producer:
                    d = max(d, gate_depth(producer[a]) + 1)
                elif a not in self.inputs:
                    raise ValueError(f"wire {a!r} undriven")
            visiting.discard(idx)
            depth[idx] = d
            return d

        order = sorted(range(len(self.gates)),
                       key=lambda idx: (gate_depth(idx), idx))
        return tuple(self.gates[idx] for idx in order)


def evaluate(circuit: BoolCircuit, bits: Sequence[int]) -> tuple[int, ...]:
    """Reference DAG evaluation."""
    if len(bits) != circuit.k_in:
        raise ValueError("input arity mismatch")
    val = dict(zip(circuit.inputs, (int(b) for b in bits)))
    for g in circuit.topo_gates():
        if g.kind == AND:
            v = 1
            for a in g.args:
                v &= val[a]
            val[g.name] = v
        elif g.kind == NOT:
            val[g.name] = 1 - val[g.args[0]]
        else:
            val[g.name + ".0"] = val[g.name + ".1"] = val[g.args[0]]
    return tuple(val[w] for w in circuit.outputs)


def normalize(circuit: BoolCircuit) -> BoolCircuit:
    """Binary ANDs, fanout one, no dead gates.

    Fanout greater than one becomes a chain of splitters; unary ANDs are
    aliased away; gates whose outputs are never consumed are dropped.
    Unused *input* wires are kept (the arity is part of the interface).
    The blowup is at most quadratic.
    """
    gates = list(circuit.topo_gates())
    outputs = circuit.outputs

    # simplification passes to a fixpoint: alias unary ANDs, expand wide
    # ANDs, drop dead gates, collapse splitters with a dead leg
    while True:
        alias: dict[str, str] = {}

        def res(w: str) -> str:
            while w in alias:
                w = alias[w]
            return w

        kept: list[Gate] = []
        for g in gates:
            args = tuple(res(a) for a in g.args)
            if g.kind == AND and len(args) == 1:
                alias[g.name] = args[0]
                continue
            if g.kind == AND and len(args) > 2:
                acc = args[0]
                for j, a in enumerate(args[1:], start=1):
                    nm = g.name if j == len(args) - 1 else f"{g.name}~c{j}"
                    kept.append(Gate(nm, AND, (acc, a)))
                    acc = nm
                continue
            kept.append(Gate(g.name, g.kind, args))
        outputs = tuple(res(w) for w in outputs)

        uses: dict[str, int] = {}
        for g in kept:
            for a in g.args:
                uses[a] = uses.get(a, 0) + 1
        for w in outputs:
            uses[w] = uses.get(w, 0) + 1

        changed = False
        # dead gates
        alive = []
        for g in kept:
            if all(uses.get(w, 0) == 0 for w in g.out_wires()):
                for a in g.args:
                    uses[a] -= 1
                changed = True
            else:
                alive.append(g)
        kept = alive
        # splitters with one dead leg forward their argument
        alive = []
        for g in kept:
            if g.kind == SPLIT:
                w0, w1 = g.out_wires()
                u0, u1 = uses.get(w0, 0), uses.get(w1, 0)
                if u0 == 0 or u1 == 0:
                    live = w1 if u0 == 0 else w0
                    alias[live] = g.args[0]
                    changed = True
                    continue
            alive.append(g)
        kept = alive
        if alias:
            changed = True
            kept = [Gate(g.name, g.kind, tuple(res(a) for a in g.args))
                    for g in kept]
            outputs = tuple(res(w) for w in outputs)
        gates = kept
        if not changed:
            break

    # give every multiply-used wire a splitter tree
    uses = {}
    for g in kept:
        for a in g.args:
            uses[a] = uses.get(a, 0) + 1
    for w in outputs:
        uses[w] = uses.get(w, 0) + 1

    supply: dict[str, list[str]] = {}
    extra: list[Gate] = []

    def leaves(w: str, need: int) -> list[str]:
        if need == 1:
            return [w]
        # chain of splitters: each adds one consumable leaf
        out = []
        cur = w
        for j in range(need - 1):
            nm = f"{w}~s{j}"
            extra.append(Gate(nm, SPLIT, (cur,)))
            out.append(nm + ".0")
            cur = nm + ".1"
        out.append(cur)
        return out

    for w, n in uses.items():
        if n > 1:
            supply[w] = leaves(w, n)

    def take(w: str) -> str:
        if w in supply:
            return supply[w].pop(0)
        return w

    final = []
    for g in kept:
        final.append(Gate(g.name, g.kind, tuple(take(a) for a in g.args)))
    final.extend(extra)
    outputs = tuple(take(w) for w in outputs)
    out = BoolCircuit(circuit.inputs, outputs, tuple(final))
    return BoolCircuit(out.inputs, out.outputs, out.topo_gates())


def is_normalized(circuit: BoolCircuit) -> bool:
    uses: dict[str, int] = {}
    for g in circuit.gates:
        if g.kind == AND and len(g.args) != 2:
            return False
        for a in g.args:
            uses[a] = uses.get(a, 0) + 1
    for w in circuit.outputs:
        uses[w] = uses.get(w, 0) + 1
    for g in circuit.gates:
        if any(uses.get(w, 0) != 1 for w in g.out_wires()):
            return False
    return all(n == 1 for n in uses.values())


# ---------------------------------------------------------------------------
# text format

def format_circuit(circuit: BoolCircuit) -> str:
    lines = [f"INPUT {w}" for w in circuit.inputs]
    for g in circuit.gates:
        lines.append(f"{g.name} = {g.kind} " + " ".join(g.args))
    lines.append("OUTPUT " + " ".join(circuit.outputs))
    return "\n".join(lines) + "\n"


def parse_circuit(text: str) -> BoolCircuit:
    inputs: list[str] = []
    outputs: list[str] = []
    gates: list[Gate] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("INPUT"):
            inputs.extend(line.split()[1:])
        elif line.startswith("OUTPUT"):
            outputs.extend(line.split()[1:])
        else:
            lhs, rhs = line.split("=", 1)
            parts = rhs.split()
            kind = parts[0].upper()
            if kind not in (AND, NOT, SPLIT):
                raise ValueError(f"unknown gate kind {kind!r}")
            gates.append(Gate(lhs.strip(), kind, tuple(parts[1:])))
    return BoolCircuit(tuple(inputs), tuple(outputs), tuple(gates))


# ---------------------------------------------------------------------------
# compilation to a token network

def _term_in(j: int, x: int) -> str:
    return f"i{j}({x})"


def _term_read(j: int) -> str:
    return f"i^{j}"


def _term_out_read(j: int, x: int) -> str:
    return f"o^{j}({x})"


@dataclass
class CompiledNetwork:
    """A circuit compiled into a constant-weight token network.

    The protocol word feeds each input bit, fires the gate chain with the
    pump terminal, then reads each output bit; the total weight is the
    same for every input vector.
    """

    network: Network
    q0: dict
    k: int
    size: int
    transition_weight: Fraction
    circuit: BoolCircuit

    def protocol_word(self, bits: Sequence[int]) -> list[str]:
        if len(bits) != self.k:
            raise ValueError("arity mismatch")
        word = [_term_in(j, int(b)) for j, b in enumerate(bits)]
        word.append("#")
        word.extend(_term_read(j) for j in range(self.k))
        return word

    def run_protocol(self, bits: Sequence[int]) -> tuple[tuple[int, ...],
                                                         Fraction]:
        word = self.protocol_word(bits)
        res = run_network_word(self.network, self.network.initial_state(),
                               word)
        expected_prefix = tuple(f"o{j}" for j in range(self.k)) + ("$",)
        if res.outputs[:self.k + 1] != expected_prefix:
            raise AssertionError(f"protocol prefix wrong: {res.outputs}")
        vals = []
        for j, o in enumerate(res.outputs[self.k + 1:]):
            want0, want1 = _term_out_read(j, 0), _term_out_read(j, 1)
            if o == want1:
                vals.append(1)
            elif o == want0:
                vals.append(0)
            else:
                raise AssertionError(f"unexpected readout terminal {o}")
        return tuple(vals), res.weight


def compile_to_network(circuit: BoolCircuit) -> CompiledNetwork:
    """One latching switch per wire, one gadget per gate, pump chain,
    then bit readout; every input leg is padded so all transitions carry
    one common weight.
    """
    c = circuit if is_normalized(circuit) else normalize(circuit)
    if c.k_in != c.k_out:
        raise ValueError("compilation expects equal input/output arity")
    k = c.k_in
    net = Network(name="circuit")

    wires = set(c.inputs)
    for g in c.gates:
        wires.update(g.out_wires())
    for w in wires:
        net.add(f"w.{w}", disposable_switch(), SWITCH_INITIAL)

    pending_in: dict[str, tuple[str, str]] = {}

    # input latches
    for j, w in enumerate(c.inputs):
        m = net.add(f"lat{j}.m", disposable_merge(), MERGE_INITIAL)
        t = net.add(f"lat{j}.t", trivial_merge(), MERGE_INITIAL)
        pending_in[_term_in(j, 1)] = (f"w.{w}", "i")
        net.connect((f"w.{w}", "o"), (m, "i0"))
        pending_in[_term_in(j, 0)] = (t, "i")
        net.connect((t, "o"), (m, "i1"))
        net.expose_output((m, "o"), f"o{j}")

    # gate gadgets, chained in topological order
    gate_entries: list[tuple[str, str]] = []
    gate_exits: list[tuple[str, str]] = []
    for gi, g in enumerate(c.topo_gates()):
        tag = f"g{gi}"
        if g.kind == NOT:
            w, v = g.args[0], g.name
            m = net.add(f"{tag}.m", disposable_merge(), MERGE_INITIAL)
            t = net.add(f"{tag}.t", trivial_merge(), MERGE_INITIAL)
            net.connect((f"w.{w}", "o'(0)"), (f"w.{v}", "i"))
            net.connect((f"w.{v}", "o"), (m, "i0"))
            net.connect((f"w.{w}", "o'(1)"), (t, "i"))
            net.connect((t, "o"), (m, "i1"))
        elif g.kind == SPLIT:
            w = g.args[0]
            v, u = g.out_wires()
            m = net.add(f"{tag}.m", disposable_merge(), MERGE_INITIAL)
            t1 = net.add(f"{tag}.t1", trivial_merge(), MERGE_INITIAL)
            t2 = net.add(f"{tag}.t2", trivial_merge(), MERGE_INITIAL)
            net.connect((f"w.{w}", "o'(1)"), (f"w.{v}", "i"))
            net.connect((f"w.{v}", "o"), (f"w.{u}", "i"))
            net.connect((f"w.{u}", "o"), (m, "i0"))
            net.connect((f"w.{w}", "o'(0)"), (t1, "i"))
            net.connect((t1, "o"), (t2, "i"))
            net.connect((t2, "o"), (m, "i1"))
        else:  # AND
            w, v = g.args
            u = g.name
            m1 = net.add(f"{tag}.m1", disposable_merge(), MERGE_INITIAL)
            m2 = net.add(f"{tag}.m2", disposable_merge(), MERGE_INITIAL)
            t = net.add(f"{tag}.t", trivial_merge(), MERGE_INITIAL)
            net.connect((m1, "o"), (m2, "i0"))
            net.connect((f"w.{w}", "o'(0)"), (t, "i"))
            net.connect((t, "o"), (m1, "i0"))
            net.connect((f"w.{w}", "o'(1)"), (f"w.{v}", "i'"))
            net.connect((f"w.{v}", "o'(0)"), (m1, "i1"))
            net.connect((f"w.{v}", "o'(1)"), (f"w.{u}", "i"))
            net.connect((f"w.{u}", "o"), (m2, "i1"))
            m = m2
        gate_entries.append((f"w.{g.args[0]}", "i'"))
        gate_exits.append((m, "o"))

    if gate_entries:
        pending_in["#"] = gate_entries[0]
        for prev_exit, entry in zip(gate_exits, gate_entries[1:]):
            net.connect(prev_exit, entry)
        net.expose_output(gate_exits[-1], "$")
    else:
        t = net.add("pump.t", trivial_merge(), MERGE_INITIAL)
        pending_in["#"] = (t, "i")
        net.expose_output((t, "o"), "$")

    # readout
    for j, w in enumerate(c.outputs):
        pending_in[_term_read(j)] = (f"w.{w}", "i'")
        net.expose_output((f"w.{w}", "o'(0)"), _term_out_read(j, 0))
        net.expose_output((f"w.{w}", "o'(1)"), _term_out_read(j, 1))

    # weight balancing: measure every leg, then pad each external input
    # with trivial merges up to the maximum.  Bit legs are measured from
    # the initial state; the pump and readout legs on the all-zero run
    # (their weights do not depend on the bits).
    for name, dst in pending_in.items():
        net.expose_input(name, dst)
    probe = CompiledNetwork(net, net.initial_state(), k, net.size,
                            Fraction(0), c)
    legs: dict[str, Fraction] = {}
    for j in range(k):
        for x in (0, 1):
            _, _, wgt = net.step(net.initial_state(), _term_in(j, x))
            legs[_term_in(j, x)] = wgt
    state = net.initial_state()
    for letter in probe.protocol_word([0] * k):
        state, _, wgt = net.step(state, letter)
        legs.setdefault(letter, wgt)
    target = max(legs.values())
    for name, raw in legs.items():
        pad = int(target - raw)
        if pad == 0:
            continue
        dst = net.ext_in.pop(name)
        first, last = net.pad_chain(pad, f"bal.{name}")
        net.expose_input(name, first)
        net.connect(last, dst)

    return CompiledNetwork(net, net.initial_state(), k, net.size,
                           target, c)


# ---------------------------------------------------------------------------
# layered backward-simulation circuit

class OrbitOverlap(ValueError):
    """The pattern set's padded orbits collide within the horizon."""


class _CB:
    """Tiny gate-emission helper with shared constants."""

    def __init__(self, inputs: Sequence[str]):
        self.inputs = tuple(inputs)
        self.gates: list[Gate] = []
        self.n = 0
        self._c0: Optional[str] = None

    def fresh(self, kind: str, args: tuple[str, ...]) -> str:
        self.n += 1
        name = f"n{self.n}"
        self.gates.append(Gate(name, kind, args))
        return name

    def AND(self, a: str, b: str) -> str:
        return self.fresh(AND, (a, b))

    def NOT(self, a: str) -> str:
        return self.fresh(NOT, (a,))

    def OR(self, a: str, b: str) -> str:
        return self.NOT(self.AND(self.NOT(a), self.NOT(b)))

    def OR_list(self, xs: list[str]) -> str:
        if not xs:
            return self.const0()
        acc = xs[0]
        for x in xs[1:]:
            acc = self.OR(acc, x)
        return acc

    def AND_list(self, xs: list[str]) -> str:
        if not xs:
            return self.NOT(self.const0())
        acc = xs[0]
        for x in xs[1:]:
            acc = self.AND(acc, x)
        return acc

    def XOR(self, a: str, b: str) -> str:
        return self.OR(self.AND(a, self.NOT(b)), self.AND(self.NOT(a), b))

    def EQ(self, a: str, b: str) -> str:
        return self.NOT(self.XOR(a, b))

    def const0(self) -> str:
        if self._c0 is None:
            x = self.inputs[0]
            self._c0 = self.AND(x, self.NOT(x))
        return self._c0

    def const1(self) -> str:
        return self.NOT(self.const0())

    def build(self, outputs: Sequence[str]) -> BoolCircuit:
        return BoolCircuit(self.inputs, tuple(outputs), tuple(self.gates))
