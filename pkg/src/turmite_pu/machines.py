"""The 4-state machine and its 5-state counter variant.

Both machines act on a binary tape with radius 1.  A step first tries one
diagonal bit-moving rewrite (in any of its four rotations, in either
direction), then advances the head.  The 5-state variant adds a modulo-2
counter state so northward travel takes two steps, fixing the parity
defect of the 4-state machine.
"""

from __future__ import annotations

from .core import (Coord, HeadRequired, NonInjectiveRule, SparseConfig,
                   TurmiteDef, default_offsets, run, step_head)

N, E, S, W = "N", "E", "S", "W"
N_STAR = "N*"
DIRECTIONS = (N, E, S, W)

VEC: dict[str, Coord] = {N: (0, 1), E: (1, 0), S: (0, -1), W: (-1, 0)}
LEFT = {N: W, W: S, S: E, E: N}
RIGHT = {N: E, E: S, S: W, W: N}
OPPOSITE = {N: S, S: N, E: W, W: E}

_OFFSETS = default_offsets(1)
_IDX = {off: i for i, off in enumerate(_OFFSETS)}


def _fwd_right(d: str) -> Coord:
    fx, fy = VEC[d]
    rx, ry = VEC[RIGHT[d]]
    return (fx + rx, fy + ry)


def _back_right(d: str) -> Coord:
    bx, by = VEC[OPPOSITE[d]]
    rx, ry = VEC[RIGHT[d]]
    return (bx + rx, by + ry)


def _bit(bits: int, off: Coord) -> int:
    return (bits >> _IDX[off]) & 1


def _set_bit(bits: int, off: Coord, value: int) -> int:
    i = _IDX[off]
    return (bits & ~(1 << i)) | (value << i)


def rewrite_patterns() -> list[dict]:
    """The eight rewrite patterns: four rotations, both directions.

    Each pattern constrains four cells: the head cell, the moved bit's
    diagonal, and two context cells that must hold one shared arbitrary
    value.  The shared value is essential: with independent context cells
    the machine could make two right turns in a row.
    """
    pats = []
    for d in DIRECTIONS:
        f, r = VEC[d], VEC[RIGHT[d]]
        b = VEC[OPPOSITE[d]]
        # pull: on 0, a 1 at forward-right moves onto the head, turn left
        pats.append({
            "state": d, "turn": "left", "new_state": LEFT[d],
            "head_sym": 0, "diag": _fwd_right(d), "diag_sym": 1,
            "ctx": (f, r),
        })
        # push: on 1, the bit moves to backward-right, turn right
        pats.append({
            "state": d, "turn": "right", "new_state": RIGHT[d],
            "head_sym": 1, "diag": _back_right(d), "diag_sym": 0,
            "ctx": (b, r),
        })
    return pats


def _assert_non_overlapping(pats) -> None:
    """Concrete instantiations must be pairwise disjoint per state."""
    concrete = []
    for p in pats:
        for a in (0, 1):
            req = {(0, 0): p["head_sym"], p["diag"]: p["diag_sym"],
                   p["ctx"][0]: a, p["ctx"][1]: a}
            concrete.append((p["state"], req))
    for i in range(len(concrete)):
        for j in range(i + 1, len(concrete)):
            qi, ri = concrete[i]
            qj, rj = concrete[j]
            if qi != qj:
                continue
            if all(rj.get(k, v) == v for k, v in ri.items()):
                raise AssertionError("overlapping rewrite patterns")


def apply_rewrite(d: str, bits: int) -> tuple[str, int]:
    """Phase 1 on a 3x3 patch: at most one pattern applies."""
    f, r = VEC[d], VEC[RIGHT[d]]
    b = VEC[OPPOSITE[d]]
    head = _bit(bits, (0, 0))
    if head == 0:
        diag = _fwd_right(d)
        if _bit(bits, diag) == 1 and _bit(bits, f) == _bit(bits, r):
            bits = _set_bit(bits, (0, 0), 1)
            bits = _set_bit(bits, diag, 0)
            return LEFT[d], bits
    else:
        diag = _back_right(d)
        if _bit(bits, diag) == 0 and _bit(bits, b) == _bit(bits, r):
            bits = _set_bit(bits, (0, 0), 0)
            bits = _set_bit(bits, diag, 1)
            return RIGHT[d], bits
    return d, bits


def build_barM() -> TurmiteDef:
    """The 4-state machine: rewrite if possible, then advance."""
    _assert_non_overlapping(rewrite_patterns())
    table = {}
    for d in DIRECTIONS:
        for bits in range(512):
            d2, bits2 = apply_rewrite(d, bits)
            table[(d, bits)] = (d2, bits2, VEC[d2])
    m = TurmiteDef(
        name="barM",
        states=DIRECTIONS,
        radius=1,
        offsets=_OFFSETS,
        anchors={d: (0, 0) for d in DIRECTIONS},
        table=table,
    )
    if not m.check_injective():
        raise NonInjectiveRule("4-state table failed injectivity self-check")
    return m


def build_M() -> TurmiteDef:
    """The 5-state machine with the modulo-2 counter.

    Phase 1: the rewrite (the counter state is inert).  Phase 2: advance,
    unless in the counter state.  Phase 3: toggle N <-> N*.
    """
    _assert_non_overlapping(rewrite_patterns())
    states = (N, N_STAR, E, S, W)
    table = {}
    for q in states:
        for bits in range(512):
            if q == N_STAR:
                # phases: no rewrite, no move, toggle back to N
                table[(q, bits)] = (N, bits, (0, 0))
                continue
            d2, bits2 = apply_rewrite(q, bits)
            move = VEC[d2]
            q3 = N_STAR if d2 == N else d2
            table[(q, bits)] = (q3, bits2, move)
    m = TurmiteDef(
        name="M",
        states=states,
        radius=1,
        offsets=_OFFSETS,
        anchors={q: (0, 0) for q in states},
        table=table,
    )
    if not m.check_injective():
        raise NonInjectiveRule("5-state table failed injectivity self-check")
    return m


def sigma(cfg: SparseConfig) -> SparseConfig:
    """Time-symmetry involution: bit flip, then head reversal, then mirror.

    Defined only for heads carrying a plain direction; the counter state
    is outside its domain.
    """
    if cfg.head is None:
        raise HeadRequired("sigma needs a head")
    q, (x, y) = cfg.head
    if q not in DIRECTIONS:
        raise ValueError(f"sigma is undefined for state {q!r}")
    # opposite map: reverse the direction, step back along the old heading
    vx, vy = VEC[q]
    q2 = OPPOSITE[q]
    x2, y2 = x - vx, y - vy
    # bit flip: swap the background, keep the exception set
    bg = cfg.background ^ 1
    # mirror: negate x everywhere, flip horizontal states
    q3 = OPPOSITE[q2] if q2 in (E, W) else q2
    ones = frozenset((-a, b) for a, b in cfg.ones)
    return SparseConfig(ones, bg, (q3, (-x2, y2)))


class NoMatch(RuntimeError):
    """The two-machine correspondence failed; indicates an engine bug."""


def correspondence_exponent(z: SparseConfig, barM: TurmiteDef,
                            M: TurmiteDef) -> int:
    """Return k in {1,2} with one 4-state step = k 5-state steps at z."""
    if z.head is None or z.head_state not in DIRECTIONS:
        raise HeadRequired("correspondence needs a plain-direction head")
    target = step_head(barM, z)
    y = step_head(M, z)
    if y == target:
        return 1
    y2 = step_head(M, y)
    if y2 == target:
        return 2
    raise NoMatch("neither one nor two steps reproduce the 4-state step")


def permutation_witness(before: SparseConfig, after: SparseConfig):
    """A finite-support tape permutation carrying before to after.

    Returns a dict mapping source to destination cells (empty dict =
    identity), or None when the symbol counts differ so no permutation
    exists.
    """
    if before.background != after.background:
        raise ValueError("backgrounds differ")
    if len(before.ones) != len(after.ones):
        return None
    vacated = sorted(before.ones - after.ones)
    filled = sorted(after.ones - before.ones)
    perm: dict[Coord, Coord] = {}
    for src, dst in zip(vacated, filled):
        perm[src] = dst
        perm[dst] = src
    return perm


def rotate_config(cfg: SparseConfig) -> SparseConfig:
    """Rotate a configuration by 90 degrees counterclockwise."""
    rot_state = {N: W, W: S, S: E, E: N}
    ones = frozenset((-y, x) for x, y in cfg.ones)
    head = None
    if cfg.head is not None:
        q, (x, y) = cfg.head
        if q not in rot_state:
            raise ValueError("rotation defined for plain directions only")
        head = (rot_state[q], (-y, x))
    return SparseConfig(ones, cfg.background, head)


def rotation_conjugacy_holds(barM: TurmiteDef) -> bool:
    """Table-level check that conjugating by 90-degree rotation is trivial.

    For every (state, patch) rule, rotating input and output reproduces an
    existing rule.
    """
    rot_state = {N: W, W: S, S: E, E: N}

    def rot_bits(bits: int) -> int:
        out = 0
        for i, (x, y) in enumerate(_OFFSETS):
            if (bits >> i) & 1:
                out |= 1 << _IDX[(-y, x)]
        return out

    for (q, bits), (p, bits2, (mx, my)) in barM.table.items():
        rq = rot_state[q]
        rres = barM.table[(rq, rot_bits(bits))]
        if rres != (rot_state[p], rot_bits(bits2), (-my, mx)):
            return False
    return True
