import pytest

from turmite_pu.core import SparseConfig
from turmite_pu.dynamics import Region, escape
from turmite_pu.stages import (BudgetExceeded, build_transformation_process,
                               clay_cells, planned_transform_time,
                               pu_transform, transport_passes)

PROBE_FIG = {(1, 4), (3, 3), (3, 5), (4, 3), (4, 4), (4, 6), (5, 5),
             (6, 3), (6, 4), (7, 6)}

SCULPT_BLOCK = {(x, y) for x in range(3, 8) for y in range(3, 7)}


def test_probe_stage_figure(M):
    panels = [
        (3, 3, (PROBE_FIG - {(3, 3)}) | {(2, 2)}),
        (2, 2, None),
        (1, 1, None),
    ]
    cfg = SparseConfig(frozenset(PROBE_FIG))
    reg = Region(0, 7, 0, 6)
    found = {(3, 3): (2, 2), (2, 2): (1, 1), (1, 1): (0, 0)}
    expect = set(PROBE_FIG)
    for row, exit_col, _ in panels:
        res = escape(M, cfg.with_head("E", (-1, row)), reg)
        src = next(c for c in found if c in expect)
        expect = (expect - {src}) | {found[src]}
        assert set(res.exit_config.ones) == expect
        assert res.exit_coord == (exit_col, -1)
        cfg = res.exit_config.without_head()


def test_transport_corner_move(M):
    n, m = 6, 1
    clay = clay_cells(m, n)
    corner = (n + m + 3, n + m + 3)
    assert corner in clay
    res = escape(M, SparseConfig(clay, 0, ("N", (n + m + 2, -1))),
                 Region(0, 2 * n + m - 1, 0, 2 * n + m - 1))
    moved = set(res.exit_config.ones)
    assert moved == (set(clay) - {corner}) | {(n + m + 2, n + m + 2)}


def test_sculpt_stage_figure(M):
    seq = [
        (("N", (2, -1)), (SCULPT_BLOCK - {(3, 3)}) | {(2, 2)}),
        (("W", (8, 1)), (SCULPT_BLOCK - {(3, 3)}) | {(3, 1)}),
        (("W", (8, 1)), (SCULPT_BLOCK - {(4, 4)}) | {(4, 2)}),
        (("E", (-1, 5)), (SCULPT_BLOCK - {(5, 5)}) | {(4, 2)}),
        (("E", (-1, 6)), (SCULPT_BLOCK - {(6, 6)}) | {(4, 2)}),
    ]
    cfg = SparseConfig(frozenset(SCULPT_BLOCK))
    reg = Region(0, 7, 0, 6)
    for head, want in seq:
        res = escape(M, cfg.with_head(*head), reg)
        assert set(res.exit_config.ones) == want
        cfg = res.exit_config.without_head()


def test_clay_geometry():
    cells = clay_cells(1, 20)
    rows = {}
    for (x, y) in cells:
        rows.setdefault(y, []).append(x)
    lens = [len(v) for _, v in sorted(rows.items())]
    assert lens == sorted(lens, reverse=True)       # bottom row longest
    assert all(a - b == 1 for a, b in zip(lens, lens[1:]))
    assert min(min(x for x, _ in cells), min(y for _, y in cells)) \
        == 20 + 1 + 3


P1 = SparseConfig(frozenset(), 0, ("E", (0, 0)))
P2 = SparseConfig(frozenset({(0, 0)}), 0, ("N", (0, 0)))


def test_builder_three_stages(M):
    from turmite_pu.borderproc import (check_abstract_realization,
                                       eval_border_process,
                                       reachable_sequences)
    st = build_transformation_process(
        [P1, P2], lambda i: SparseConfig(frozenset()), lambda i: i)
    bp = st.border_process()
    for pi, p in enumerate(bp.patterns):
        res = eval_border_process(bp, p, M)
        region = {(x, y) for x in range(st.n, st.n + st.m)
                  for y in range(st.n, st.n + st.m)}
        assert region <= set(res.final.ones)   # region covered by material
        assert res.time_component == pi
    net = st.abstract_realization()
    check_abstract_realization(bp, net, net.initial_state(),
                               reachable_sequences(bp, M))


def test_probe_drag_parks_clear_of_corridor(M):
    st = build_transformation_process(
        [P2], lambda i: SparseConfig(frozenset()), lambda i: 0)
    from turmite_pu.borderproc import eval_border_process
    bp = st.border_process()
    res = eval_border_process(bp, bp.patterns[0], M)
    n = st.n
    # the probed bit ends parked southwest, outside the cross corridor
    strays = [c for c in res.final.ones
              if c[0] < n - 3 and c[1] < n - 3]
    assert strays
    assert all(c[0] < n - 3 and c[1] < n - 3 for c in strays)


def test_pu_transform_budget_accounting():
    with pytest.raises(BudgetExceeded) as e:
        pu_transform([P1, P2],
                     lambda i: SparseConfig(frozenset(), 0, ("E", (0, 0))),
                     budget=100_000)
    assert e.value.required > e.value.budget
    assert "tau'" in str(e.value)


def test_sculpt_gated_beyond_unit_regions():
    Q1 = SparseConfig(frozenset({(1, 1)}), 0, ("E", (0, 0)))
    Q2 = SparseConfig(frozenset({(0, 1)}), 0, ("S", (1, 1)))
    with pytest.raises(BudgetExceeded):
        build_transformation_process(
            [Q1, Q2], lambda i: SparseConfig(frozenset()), lambda i: 0,
            stages=("escape", "probe", "transport", "sculpt"))


def test_planned_time_formula():
    assert planned_transform_time(7, 100, 22) == 7 + 100 + 2 * 22 + 2


def test_transport_passes_follows_published_count():
    assert transport_passes(1) == 5 + 1 + 3
    assert transport_passes(2) == 20 + 2 + 3
