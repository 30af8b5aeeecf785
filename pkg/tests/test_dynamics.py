import math

import pytest

from turmite_pu.core import SparseConfig, _RunState, invert
from turmite_pu.dynamics import (EscapeTimeout, Region, classify_turns,
                                 containment_check, escape, kshape,
                                 kshape_escape_time, periodic_search,
                                 potential, potential_head, potential_tape)
from turmite_pu.machines import LEFT
from conftest import random_config


def test_escape_straight_run(M):
    n = 6
    res = escape(M, SparseConfig(frozenset(), 0, ("E", (0, 0))),
                 Region(0, n - 1, 0, n - 1))
    assert res.tau == n and res.exit_coord == (n, 0)


def test_escape_turn_example(barM):
    res = escape(barM, SparseConfig(frozenset({(1, 1)}), 0, ("N", (0, 0))),
                 Region(0, 2, 0, 2))
    # the rewrite and the move happen within a single step
    assert (res.tau, res.exit_coord, res.exit_state) == (1, (-1, 0), "W")


def test_escape_timeout():
    from turmite_pu.machines import build_M
    M = build_M()
    cfg = SparseConfig(frozenset(), 0, ("E", (0, 0)))
    with pytest.raises(EscapeTimeout):
        escape(M, cfg, Region(0, 50, 0, 50), cap=10)


def test_potential_example():
    cfg = SparseConfig(frozenset({(1, 1)}), 0, ("E", (2, 1)))
    assert potential_head(cfg) == -2 * 3 + 2
    assert potential_tape(cfg, 5) == 4
    assert potential(cfg, 5) == 0
    empty = SparseConfig(frozenset(), 0, ("N", (0, 0)))
    assert potential(empty, 4) == 0


def test_potential_case_table(barM, rng):
    nn = 6
    checked = 0
    for _ in range(200):
        cfg = SparseConfig(
            frozenset((rng.randrange(1, nn + 1), rng.randrange(1, nn + 1))
                      for _ in range(rng.randrange(0, 9))),
            0, (rng.choice("NESW"),
                (rng.randrange(1, nn + 1), rng.randrange(1, nn + 1))))
        st = _RunState(barM, cfg)
        for _t in range(150):
            if not (1 <= st.pos[0] <= nn and 1 <= st.pos[1] <= nn):
                break
            before = potential(st.freeze(), nn)
            prev = st.state
            st.step()
            delta = potential(st.freeze(), nn) - before
            if st.state == prev:
                assert delta == -2
            elif st.state == LEFT[prev]:
                assert delta == -4
            else:
                assert delta == 0
            checked += 1
    assert checked > 500


def test_escape_before_potential_cap(barM, rng):
    for nn in (4, 8):
        for _ in range(20):
            cfg = SparseConfig(
                frozenset((rng.randrange(1, nn + 1),
                           rng.randrange(1, nn + 1))
                          for _ in range(rng.randrange(0, nn))),
                0, (rng.choice("NESW"),
                    (rng.randrange(1, nn + 1), rng.randrange(1, nn + 1))))
            pi0 = potential(cfg, nn)
            cap = pi0 + 2 * (2 * (nn + 2) + 2) + 4
            res = escape(barM, cfg, Region(1, nn, 1, nn), cap=cap)
            assert res.tau <= cap


def test_classify_turns(barM, rng):
    empty = SparseConfig(frozenset(), 0, ("E", (0, 0)))
    assert all(e.kind == "straight" for e in classify_turns(barM, empty, 20))
    pull = SparseConfig(frozenset({(1, 1)}), 0, ("N", (0, 0)))
    assert classify_turns(barM, pull, 1)[0].kind == "left"
    for _ in range(60):
        ev = classify_turns(barM, random_config(rng), 400)
        for a, b in zip(ev, ev[1:]):
            assert not (a.kind == "right" and b.kind == "right")


def test_containment(M, rng):
    for _ in range(60):
        ones = frozenset((rng.randrange(0, 8), rng.randrange(0, 8))
                         for _ in range(rng.randrange(0, 14)))
        cfg = SparseConfig(ones, 0, (rng.choice(["N", "N*", "E", "S", "W"]),
                                     (rng.randrange(0, 8),
                                      rng.randrange(0, 8))))
        rep = containment_check(M, cfg, 1200, Region(0, 7, 0, 7))
        assert rep.expanded.xmin == -1
    headless = SparseConfig(frozenset({(1, 1)}))
    containment_check(M, headless, 10, Region(0, 3, 0, 3))


def test_containment_inverse_roles_swapped(Minv, rng):
    for _ in range(30):
        ones = frozenset((rng.randrange(0, 8), rng.randrange(0, 8))
                         for _ in range(rng.randrange(0, 12)))
        cfg = SparseConfig(ones, 1, (rng.choice(["N", "N*", "E", "S", "W"]),
                                     (rng.randrange(0, 8),
                                      rng.randrange(0, 8))))
        containment_check(Minv, cfg, 800, Region(0, 7, 0, 7))


def test_periodic_search(M, rng):
    assert periodic_search(M, SparseConfig(frozenset({(0, 0)})), 5) == 1
    for _ in range(40):
        z = random_config(rng, ["N", "N*", "E", "S", "W"])
        assert periodic_search(M, z, 2500) is None


def test_escape_via_expanding_windows(M, rng):
    # recurrence would need the head to stay in some finite window; it
    # leaves every one of a growing family
    z = random_config(rng, span=3)
    for nn in (4, 8, 16):
        escape(M, z, Region(-nn, nn, -nn, nn))


def test_kshape_coordinates():
    ks = kshape(1, 0)
    assert set(ks.ones) == {(0, -1), (0, 0), (-3, 1), (2, 0), (2, -2),
                            (2, -5), (0, -2), (-3, -5)}
    assert ks.head == ("E", (1, 0))
    counts = len(kshape(3, 2).ones)
    assert counts == 6 * 3 + (3 + 1)


def test_kshape_bounds_and_cubic_escape(barM):
    for nn in (4, 8, 16):
        tau, reg = kshape_escape_time(barM, nn, nn)
        assert reg.side <= 7 * nn
        assert tau >= nn ** 3


def test_kshape_loglog_slope(barM):
    pts = []
    for nn in (4, 8, 16, 32):
        tau, _ = kshape_escape_time(barM, nn, nn)
        pts.append((math.log(nn), math.log(tau)))
    k = len(pts)
    sx = sum(x for x, _ in pts)
    sy = sum(y for _, y in pts)
    sxx = sum(x * x for x, _ in pts)
    sxy = sum(x * y for x, y in pts)
    slope = (k * sxy - sx * sy) / (k * sxx - sx * sx)
    assert 2.7 <= slope <= 3.3
