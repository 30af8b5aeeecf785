import itertools
import random

import pytest

from turmite_pu.circuits import (BoolCircuit, CyclicCircuit, Gate,
                                 compile_to_network, evaluate,
                                 format_circuit, is_normalized, normalize,
                                 parse_circuit)
from turmite_pu.core import SparseConfig, disjoint_orbits
from turmite_pu.inverse_circuit import (OrbitOverlap, escape_window,
                                        inverse_simulation_circuit)
from turmite_pu.sautomata import max_transition_weight


def rand_circuit(rng, k, n):
    wires = [f"x{j}" for j in range(k)]
    gates = []
    for gi in range(n):
        kind = rng.choice(["AND", "AND", "NOT", "SPLIT"])
        if kind == "AND":
            args = tuple(rng.sample(wires,
                                    rng.randint(1, min(3, len(wires)))))
        else:
            args = (rng.choice(wires),)
        g = Gate(f"g{gi}", kind, args)
        gates.append(g)
        wires.extend(g.out_wires())
    outs = tuple(rng.choice(wires) for _ in range(k))
    return BoolCircuit(tuple(f"x{j}" for j in range(k)), outs,
                       tuple(gates))


def test_evaluate_basics():
    ident = BoolCircuit(("a",), ("a",), ())
    assert evaluate(ident, [1]) == (1,)
    notc = parse_circuit("INPUT a\nn = NOT a\nOUTPUT n\n")
    assert evaluate(notc, [0]) == (1,)
    andc = parse_circuit("INPUT a\nINPUT b\ng = AND a b\nOUTPUT g g\n")
    assert evaluate(andc, [1, 1]) == (1, 1)
    assert evaluate(andc, [1, 0]) == (0, 0)


def test_parse_format_roundtrip():
    c = parse_circuit("INPUT a\nINPUT b\ng = AND a b\ns = SPLIT g\n"
                      "OUTPUT s.0 s.1\n")
    assert parse_circuit(format_circuit(c)) == c


def test_cycle_detection():
    c = BoolCircuit(("a",), ("g",),
                    (Gate("g", "AND", ("a", "h")),
                     Gate("h", "NOT", ("g",))))
    with pytest.raises(CyclicCircuit):
        c.topo_gates()


def test_normalize_and_chain():
    c = parse_circuit("INPUT a\nINPUT b\nINPUT c\ng = AND a b c\n"
                      "OUTPUT g g g\n")
    n = normalize(c)
    assert is_normalized(n)
    assert sum(1 for g in n.gates if g.kind == "AND") == 2
    for bits in itertools.product((0, 1), repeat=3):
        assert evaluate(n, bits) == evaluate(c, bits)


def test_normalize_fanout_tree():
    c = parse_circuit("INPUT a\nINPUT b\nINPUT c\nx = NOT a\n"
                      "p = AND x b\nq = AND x c\nr = NOT x\nOUTPUT p q r\n")
    n = normalize(c)
    assert is_normalized(n)
    assert sum(1 for g in n.gates if g.kind == "SPLIT") == 2


def test_normalize_random_equivalence():
    rng = random.Random(7)
    for _ in range(120):
        c = rand_circuit(rng, rng.randint(1, 4), rng.randint(1, 12))
        n = normalize(c)
        assert is_normalized(n)
        for bits in itertools.product((0, 1), repeat=c.k_in):
            assert evaluate(n, bits) == evaluate(c, bits)


def test_compile_single_not():
    cn = compile_to_network(parse_circuit("INPUT a\nn = NOT a\nOUTPUT n\n"))
    v0, w0 = cn.run_protocol([0])
    v1, w1 = cn.run_protocol([1])
    assert v0 == (1,) and v1 == (0,)
    assert w0 == w1


def test_compile_and_gate_all_inputs():
    c = parse_circuit("INPUT a\nINPUT b\ng = AND a b\nn = NOT a\n"
                      "OUTPUT g n\n")
    cn = compile_to_network(c)
    weights = set()
    for bits in itertools.product((0, 1), repeat=2):
        v, w = cn.run_protocol(bits)
        assert v == evaluate(c, bits)
        weights.add(w)
    assert len(weights) == 1


def test_compile_random_circuits():
    rng = random.Random(3)
    for _ in range(12):
        c = rand_circuit(rng, rng.randint(1, 3), rng.randint(1, 8))
        cn = compile_to_network(c)
        weights = set()
        for bits in itertools.product((0, 1), repeat=c.k_in):
            v, w = cn.run_protocol(bits)
            assert v == evaluate(c, bits)
            weights.add(w)
        assert len(weights) == 1
        assert max_transition_weight(cn.network) <= 2 * cn.size


def test_inverse_simulation_simple(M):
    p = SparseConfig(frozenset(), 0, ("E", (0, 0)))
    isc = inverse_simulation_circuit([p], 1)
    win, tau = escape_window(M, p, 1)
    got_p, got_tau = isc.run(win)
    assert got_p == p and got_tau == tau == 1


def test_inverse_simulation_random_sets(M, rng):
    done = 0
    while done < 6:
        m = rng.randint(1, 3)
        pats = []
        for _ in range(2):
            ones = frozenset((rng.randrange(0, m), rng.randrange(0, m))
                             for _ in range(rng.randrange(0, m * m)))
            pats.append(SparseConfig(
                ones, 0, (rng.choice(["N", "N*", "E", "S", "W"]),
                          (rng.randrange(0, m), rng.randrange(0, m)))))
        if pats[0] == pats[1]:
            continue
        taus = [escape_window(M, p, m)[1] for p in pats]
        if max(taus) > 12:
            continue
        if disjoint_orbits(M, pats, 0, max(taus)) != "disjoint-up-to-T":
            continue
        isc = inverse_simulation_circuit(pats, m)
        for p in pats:
            win, tau = escape_window(M, p, m)
            got_p, got_tau = isc.run(win)
            assert got_p == p and got_tau == tau
        done += 1


def test_inverse_simulation_orbit_overlap(M):
    p = SparseConfig(frozenset(), 0, ("E", (0, 0)))
    with pytest.raises(OrbitOverlap):
        inverse_simulation_circuit([p, p], 1)
