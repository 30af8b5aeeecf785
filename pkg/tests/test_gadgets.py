import pytest

from turmite_pu.core import SparseConfig, run
from turmite_pu.dynamics import Region, escape
from turmite_pu.gadgets import (GADGET_WEIGHT_FACTOR, Mismatch,
                                TapeSimulation, Unachievable, compose_delay,
                                delay_gadget, machine, make_delay,
                                materialize_train, merge_gadget,
                                merge_gadget_raw, route_wire, switch_gadget,
                                trivial_gadget, verify_simulation,
                                zig_down_segment, zig_segment)
from turmite_pu.layout import all_defined_words, layout_network, verify_layout
from turmite_pu.sautomata import (MERGE_INITIAL, SWITCH_INITIAL, Network,
                                  build_n_merge_network, disposable_merge,
                                  disposable_switch, trivial_merge)


def test_merge_gadget_exactness():
    raw = merge_gadget_raw()
    assert (raw.width, raw.height, raw.c) == (6, 8, 11)
    verify_simulation(raw, [["i0"], ["i1"], ["i0", "i1"]])


def test_switch_gadget_exactness():
    sw = switch_gadget()
    assert (sw.width, sw.height) == (8, 13)
    assert sw.c == GADGET_WEIGHT_FACTOR
    verify_simulation(sw, [["i"], ["i'"], ["i", "i'"]])


def test_equal_weight_factor():
    sims = [merge_gadget(), switch_gadget(), trivial_gadget()]
    assert {s.c for s in sims} == {GADGET_WEIGHT_FACTOR}
    for s in sims:
        words = {"merge": [["i0"], ["i1"]], "switch": [["i"], ["i'"]],
                 "trivial": [["i"]]}[s.name]
        verify_simulation(s, words)


def test_trivial_gadget_is_bare():
    t = trivial_gadget()
    assert not t.ones


def test_terminal_geometry():
    for sim in (merge_gadget(), switch_gadget(), trivial_gadget()):
        for term, (x, y) in sim.terminals.items():
            if term.startswith("i"):
                assert x == -1
            else:
                assert x == sim.width


def test_corrupted_pattern_detected():
    raw = merge_gadget_raw()
    broken = TapeSimulation(
        name="broken", width=raw.width, height=raw.height,
        ones=frozenset(set(raw.ones) - {(1, 0)}),
        terminals=raw.terminals, behavior=raw.behavior,
        initial=raw.initial, letter_time=raw.letter_time, c=raw.c)
    with pytest.raises(Mismatch):
        verify_simulation(broken, [["i0"]])


def _measure(seg, row=8, height=40):
    M = machine()
    cells = frozenset((dx, row + dy) for dx, dy in seg.cells)
    w = seg.cols + 4
    res = escape(M, SparseConfig(cells, 0, ("E", (-1, row))),
                 Region(0, w - 1, 0, height - 1))
    assert res.exit_coord == (w, row) and res.exit_state == "E"
    return res.tau - (w + 1)


def test_delay_gadgets_exact():
    assert _measure(delay_gadget("nine")) == 9
    assert _measure(delay_gadget("eleven")) == 11
    for k in (2, 7, 30):
        assert _measure(zig_segment(k), height=k + 12) == 3 * k
        assert _measure(zig_down_segment(k), row=k + 4,
                        height=k + 12) == 3 * k


def test_delay_concatenation():
    M = machine()
    cells, cols, extra = materialize_train(
        [delay_gadget("nine"), delay_gadget("eleven")], 2, 6)
    assert extra == 20
    w = cols + 6
    res = escape(M, SparseConfig(frozenset(cells), 0, ("E", (-1, 6))),
                 Region(0, w - 1, 0, 14))
    assert res.tau - (w + 1) == 20


def test_make_delay():
    assert [s.kind for s in make_delay(20)] == ["nine", "eleven"]
    assert [s.kind for s in make_delay(9)] == ["nine"]
    assert make_delay(0) == []
    with pytest.raises(Unachievable):
        make_delay(1)
    with pytest.raises(Unachievable):
        make_delay(9, budget_length=3)


def test_compose_delay_simulation_exact():
    M = machine()
    for extra in (28, 30, 31, 44, 100):
        segs = compose_delay(extra)
        cells, cols, dec = materialize_train(segs, 2, 15)
        assert dec == extra
        w = cols + 6
        res = escape(M, SparseConfig(frozenset(cells), 0, ("E", (-1, 15))),
                     Region(0, w - 1, 0, 40))
        assert res.tau - (w + 1) == extra


def test_wire_routing():
    M = machine()
    plan = route_wire("loop", [(-1, 2), (30, 2), (30, 20), (4, 20),
                               (4, 8), (12, 8)])
    out = run(M, SparseConfig(frozenset(plan.ones), 0, ("E", (-1, 2))),
              plan.raw_time)
    assert out.head == ("E", (12, 8))
    plan = route_wire("rturn", [(2, 2), (10, 2), (10, 9), (20, 9)])
    out = run(M, SparseConfig(frozenset(plan.ones), 0, ("E", (2, 2))),
              plan.raw_time)
    assert out.head == ("E", (20, 9))


def test_wire_crossing_is_inert():
    # two wires crossing at an empty cell: run the first, then the second
    M = machine()
    a = route_wire("a", [(-1, 5), (20, 5)])
    b = route_wire("b", [(10, -1), (10, 12)])
    cells = frozenset(a.ones | b.ones)
    out = run(M, SparseConfig(cells, 0, ("E", (-1, 5))), a.raw_time)
    assert out.head == ("E", (20, 5))
    out2 = run(M, SparseConfig(out.ones, 0, ("N", (10, -1))),
               2 * 13)
    assert out2.head_pos == (10, 12)


def _five_networks():
    nets = []
    n1 = Network(name="t")
    n1.add("t", trivial_merge(), MERGE_INITIAL)
    n1.expose_input("i", ("t", "i"))
    n1.expose_output(("t", "o"), "o")
    nets.append(n1)

    n2 = Network(name="m")
    n2.add("m", disposable_merge(), MERGE_INITIAL)
    n2.expose_input("i0", ("m", "i0"))
    n2.expose_input("i1", ("m", "i1"))
    n2.expose_output(("m", "o"), "o")
    nets.append(n2)

    n3 = Network(name="s")
    n3.add("s", disposable_switch(), SWITCH_INITIAL)
    for t in ("i", "i'"):
        n3.expose_input(t, ("s", t))
    for t in ("o", "o'(0)", "o'(1)"):
        n3.expose_output(("s", t), t)
    nets.append(n3)

    n4 = Network(name="ms")
    n4.add("m", disposable_merge(), MERGE_INITIAL)
    n4.add("s", disposable_switch(), SWITCH_INITIAL)
    n4.connect(("m", "o"), ("s", "i"))
    n4.expose_input("a", ("m", "i0"))
    n4.expose_input("b", ("m", "i1"))
    n4.expose_input("r", ("s", "i'"))
    n4.expose_output(("s", "o"), "o")
    n4.expose_output(("s", "o'(0)"), "z0")
    n4.expose_output(("s", "o'(1)"), "z1")
    nets.append(n4)

    n5, _ = build_n_merge_network(3)
    nets.append(n5)
    return nets


def test_layout_networks_timing_exact():
    for net in _five_networks():
        lay = layout_network(net)
        checked = verify_layout(lay, max_len=2)
        assert checked >= 1
        # the timing law: one transition of weight w takes e(w+1)+cw
        assert lay.letter_time(1) == 2 * lay.e + lay.c


def test_layout_multi_letter_words():
    net = _five_networks()[3]
    lay = layout_network(net)
    words = [w for w in all_defined_words(net, 3) if len(w) >= 2]
    assert words
    verify_layout(lay, words=words)


def test_layout_manifest():
    lay = layout_network(_five_networks()[1])
    text = lay.manifest.text()
    assert f"e={lay.e}" in text and "wire" in text
