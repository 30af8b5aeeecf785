import pytest

from turmite_pu.borderproc import (BorderProcess, ContainmentViolation,
                                   Mismatch, check_abstract_realization,
                                   consistent_timing_table,
                                   eval_border_process, reachable_sequences,
                                   table_process, term_in, term_out,
                                   term_out_final)
from turmite_pu.core import SparseConfig
from turmite_pu.sautomata import (MERGE_INITIAL, SWITCH_INITIAL, Network,
                                  disposable_switch, n_merge, trivial_merge)

P1 = SparseConfig(frozenset(), 0, ("E", (1, 1)))
P2 = SparseConfig(frozenset(), 0, ("N", (1, 1)))


def depth1_process():
    return table_process(
        3, 1, [P1, P2],
        {((3, 1),): (-1, 0), ((1, 3),): (0, -1)},
        {((3, 1),): 0, ((1, 3),): 5}, (-1, 0))


def depth1_network():
    net = Network(name="toyAf")
    for idx, (b, out) in enumerate([((3, 1), "o1(-1,0,0)"),
                                    ((1, 3), "o1(0,-1,5)")]):
        a = net.add(f"c{idx}.t0", trivial_merge(), MERGE_INITIAL)
        b2 = net.add(f"c{idx}.t1", trivial_merge(), MERGE_INITIAL)
        net.connect((a, "o"), (b2, "i"))
        net.expose_input(term_in(1, b), (a, "i"))
        net.expose_output((b2, "o"), out)
    return net


def test_depth0_boundary(M):
    bp = table_process(3, 1, [P1], {((3, 1),): (-1, 0)}, {}, (-1, 0))
    res = eval_border_process(bp, bp.patterns[0], M)
    assert res.exits == ((3, 1),)
    assert res.rounds[0].dwell == 2


def test_eval_transcript(M):
    bp = depth1_process()
    res = eval_border_process(bp, bp.patterns[0], M)
    assert res.exits == ((3, 1),) and res.entries == ((-1, 0),)
    assert res.time_component == 0
    res = eval_border_process(bp, bp.patterns[1], M)
    assert res.exits == ((1, 3),) and res.time_component == 5


def test_identity_reentry(M):
    # a depth-1 process that returns the head where it exited
    bp = BorderProcess(3, 1, (P1,), lambda pre: pre[-1], lambda seq: 0)
    res = eval_border_process(bp, bp.patterns[0], M)
    assert res.entries == res.exits


def test_consistent_timing_table(M):
    bp = depth1_process()
    table = consistent_timing_table(bp, M)
    assert table[(1, None, (3, 1))] == 2
    assert table[(1, None, (1, 3))] == 3


def test_containment_margin(M):
    inner = SparseConfig(frozenset({(3, 3)}), 0, ("E", (3, 3)))
    bp = BorderProcess(7, 1, (inner,), lambda pre: (-1, 0),
                       lambda seq: 0)
    assert bp.margin_ok()
    eval_border_process(bp, bp.patterns[0], M)


def test_abstract_realization_pass_and_mutation(M):
    bp = depth1_process()
    net = depth1_network()
    seqs = reachable_sequences(bp, M)
    check_abstract_realization(bp, net, net.initial_state(), seqs)

    # permuted output wiring must be caught
    bad = Network(name="bad")
    for idx, (b, out) in enumerate([((3, 1), "o1(0,-1,5)"),
                                    ((1, 3), "o1(-1,0,0)")]):
        a = bad.add(f"c{idx}.t0", trivial_merge(), MERGE_INITIAL)
        b2 = bad.add(f"c{idx}.t1", trivial_merge(), MERGE_INITIAL)
        bad.connect((a, "o"), (b2, "i"))
        bad.expose_input(term_in(1, b), (a, "i"))
        bad.expose_output((b2, "o"), out)
    with pytest.raises(Mismatch):
        check_abstract_realization(bp, bad, bad.initial_state(), seqs)


def test_time_component_surfaces_in_terminal():
    assert term_out_final(2, (0, -1), 7) == "o2(0,-1,7)"
    assert term_out(1, (3, 1)) == "o1(3,1)"
