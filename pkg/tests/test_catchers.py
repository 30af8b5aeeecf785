import pytest

from turmite_pu.catchers import (SIDES, ObstructionDetected, activate,
                                 activation_steps, catcher_activated_cells,
                                 catcher_cells, catcher_processed_cells,
                                 full_activate_array, interception_fly_col,
                                 partial_activate, place_array,
                                 place_system, sendin_entry_col,
                                 side_of_border)
from turmite_pu.core import SparseConfig, _RunState

FIG_INACTIVE = frozenset({(0, -3), (3, -4), (3, -3), (3, 4), (8, -4),
                          (8, 4), (10, -1)})
FIG_ACTIVATED = frozenset({(1, -4), (3, -4), (5, -1), (5, 2), (6, -2),
                           (6, 2), (9, -2)})
FIG_PROCESSED = frozenset({(1, -4), (3, -4), (5, -1), (5, 2), (7, -1),
                           (7, 1), (8, -1)})


def _run_to_exit(M, cells, head, bbox, cap=500_000):
    st = _RunState(M, SparseConfig(frozenset(cells), 0, head))
    x0, x1, y0, y1 = bbox
    inside = False
    for _t in range(1, cap):
        st.step()
        x, y = st.pos
        if x0 <= x <= x1 and y0 <= y <= y1:
            inside = True
        elif inside:
            return st.freeze()
    raise AssertionError("no exit")


def _heading(q):
    return "N" if q in ("N", "N*") else q


def test_catcher_figure_states_bit_for_bit():
    assert catcher_cells(1, 3) == FIG_INACTIVE
    assert catcher_activated_cells(1, 3) == FIG_ACTIVATED
    assert catcher_processed_cells(1, 3) == FIG_PROCESSED


def test_shape_bounds():
    cells = catcher_cells(1, 3)
    assert all(0 <= x <= 11 and -4 <= y <= 4 for (x, y) in cells)


def test_activate_in_configuration(M):
    cfg = SparseConfig(catcher_cells(1, 3))
    out, steps = activate(cfg, 1, 3)
    assert set(out.ones) == set(FIG_ACTIVATED)
    assert steps == activation_steps(1, 3)
    assert out.head_state == "S"


def test_activated_interception_and_inactive_transparency(M):
    out = _run_to_exit(M, FIG_ACTIVATED, ("W", (12, 2)), (0, 11, -4, 4))
    assert _heading(out.head_state) == "N" and out.head_pos[0] == 6
    for row in (0, 1, 2):
        out = _run_to_exit(M, FIG_INACTIVE, ("W", (12, row)),
                           (0, 11, -4, 4))
        assert out.head_state == "W"


def test_processed_catcher_retains_two_interception_rows(M):
    out = _run_to_exit(M, FIG_PROCESSED, ("W", (12, 2)), (0, 11, -4, 4))
    assert _heading(out.head_state) == "N" and out.head_pos[0] == 5
    out = _run_to_exit(M, FIG_PROCESSED, ("W", (12, 1)), (0, 11, -4, 4))
    assert _heading(out.head_state) == "N" and out.head_pos[0] == 7


def test_interception_fly_col_measured():
    assert interception_fly_col(1, 4, 3, "activated") == 6
    with pytest.raises(ObstructionDetected):
        interception_fly_col(1, 4, 1, "activated")


def test_array_responsibility_exhaustive(M):
    # every row r of the square is intercepted by the (n-r)-catcher
    for n in (2, 3, 4, 5, 6):
        arr = place_array(n, "west", 2)
        cells = set()
        for c in arr.catchers:
            cells |= c.cells("activated")
        west = min(x for x, _ in cells) - 3
        for row in range(n):
            a = arr.responsible(row)
            assert a == n - row
            out = _run_to_exit(M, cells, ("W", (3, row)),
                               (west, -1, -n - 9, n + 9))
            cat = arr.catcher(a)
            lat = arr._local_lateral(row)
            want = cat.to_abs((interception_fly_col(a, n + 1, lat,
                                                    "activated"), lat))
            assert _heading(out.head_state) == "N"
            assert out.head_pos[0] == want[0]


def test_system_interception_all_sides(M):
    perp = {"west": "N", "north": "E", "east": "S", "south": "W"}
    for n in (2, 3):
        sysn = place_system(n, 2)
        cells = sysn.cells("activated")
        bbox = (-300, 300, -300, 300)
        for row in range(n):
            for d, pos, side in (("W", (-1, row), "west"),
                                 ("E", (n, row), "east"),
                                 ("N", (row, n), "north"),
                                 ("S", (row, -1), "south")):
                out = _run_to_exit(M, cells, (d, pos), bbox)
                assert _heading(out.head_state) == perp[side]
        icells = sysn.cells("inactive")
        for row in range(n):
            for d, pos in (("W", (-1, row)), ("E", (n, row)),
                           ("N", (row, n)), ("S", (row, -1))):
                out = _run_to_exit(M, icells, (d, pos), bbox)
                assert _heading(out.head_state) == d


def test_partial_activate_delivers_entry_row():
    for n in (3, 4):
        for row in range(n):
            cfg, a_send, skip = partial_activate(n, row)
            assert cfg.head == ("E", (0, row))
            assert a_send == n - row
            if skip is not None:
                assert skip == a_send + 1


def test_partial_activation_full_equivalence():
    # full activation is partial activation with no skip and no send-in
    full = full_activate_array(3)
    arr = place_array(3, "west", 2)
    cells = set()
    for c in arr.catchers:
        cells |= c.cells("activated")
    assert set(full.ones) == cells


def test_rotation_of_west_gives_other_sides():
    sysn = place_system(2, 2)
    counts = {side: len(sysn.array(side).catchers) for side in SIDES}
    assert set(counts.values()) == {2}
    assert side_of_border((-1, 1), 2) == ("west", 1)
    assert side_of_border((2, 0), 2) == ("east", 0)
    assert side_of_border((1, 2), 2) == ("north", 1)
    assert side_of_border((0, -1), 2) == ("south", 0)
