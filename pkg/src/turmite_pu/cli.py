"""Command-line surface tying the modules into runnable experiments.

Exit codes: 0 ok, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .core import SparseConfig, invert, run
from .dynamics import (Region, classify_turns, containment_check, escape,
                       kshape, kshape_escape_time, periodic_search,
                       potential)
from .io_formats import (parse_pattern, render_image, render_text,
                         serialize_pattern, trace_run)
from .machines import build_barM, build_M, sigma
from .golly import RULE_NAME, export_golly_rule


def export_kshape_script(a: int, b: int) -> str:
    """A cell-placement script drawing the cubic-escape configuration.

    The coordinates equal those of ``kshape(a, b)``; the head marker is
    placed at (1, 0) facing east using the exported rule's state
    numbering.
    """
    from .golly import head_state
    cfg = kshape(a, b)
    lines = [
        "-- draw the cubic-escape-time configuration",
        'local g = golly()',
        f'g.setrule("{RULE_NAME}")',
        "local cells = {",
    ]
    for (x, y) in sorted(cfg.ones):
        lines.append(f"  {{{x}, {y}}},")
    lines.append("}")
    lines.append("for i = 1, #cells do")
    lines.append("  g.setcell(cells[i][1], cells[i][2], 1)")
    lines.append("end")
    hq, (hx, hy) = cfg.head
    lines.append(f"g.setcell({hx}, {hy}, {head_state(hq, 0, False)})"
                 f" -- head facing east")
    lines.append("g.fit()")
    return "\n".join(lines) + "\n"


def _machine(name: str):
    if name == "M":
        return build_M()
    if name == "barM":
        return build_barM()
    if name == "Minv":
        return invert(build_M())
    raise SystemExit(2)


def _load_pattern(path: str) -> SparseConfig:
    return parse_pattern(Path(path).read_text())


def cmd_simulate(args) -> int:
    machine = _machine(args.machine)
    cfg = _load_pattern(args.pattern)
    if args.model == "tape":
        from .core import MovingTapeConfig
        q, pos = cfg.head
        cfg0 = MovingTapeConfig(q, cfg.translate(
            (-pos[0], -pos[1])).without_head())
        out = run(machine, cfg0, args.steps)
        print(f"state {out.state}")
        print(serialize_pattern(out.tape), end="")
        return 0
    if args.trace:
        with open(args.trace, "w") as sink:
            out = trace_run(machine, cfg, args.steps, sink)
    else:
        out = run(machine, cfg, args.steps)
    print(serialize_pattern(out), end="")
    return 0


def cmd_escape(args) -> int:
    machine = _machine(args.machine)
    cfg = _load_pattern(args.pattern)
    a, b, c, d = (int(v) for v in args.region.split(","))
    res = escape(machine, cfg, Region(a, b, c, d), args.cap)
    print(f"tau {res.tau}")
    print(f"exit {res.exit_coord[0]} {res.exit_coord[1]} {res.exit_state}")
    return 0


def cmd_verify(args) -> int:
    import random
    rng = random.Random(7)
    barM, M = build_barM(), build_M()
    Minv = invert(M)
    failures = []

    def check(name, fn):
        try:
            fn()
            print(f"ok   {name}")
        except Exception as e:  # noqa: BLE001 - report and keep going
            failures.append(name)
            print(f"FAIL {name}: {e}")

    def rand_cfg(states="NESW", span=5, bg=0):
        ones = frozenset((rng.randrange(-span, span + 1),
                          rng.randrange(-span, span + 1))
                         for _ in range(rng.randrange(0, 2 * span)))
        return SparseConfig(ones, bg, (rng.choice(states),
                                       (rng.randrange(-3, 4),
                                        rng.randrange(-3, 4))))

    def reversibility():
        for _ in range(300):
            z = rand_cfg(["N", "N*", "E", "S", "W"])
            assert run(M, run(Minv, z, 3), 3) == z

    def conservation():
        for _ in range(20):
            z = rand_cfg()
            count = len(z.ones)
            assert len(run(M, z, 500).ones) == count

    def correspondence():
        from .machines import correspondence_exponent
        for _ in range(200):
            assert correspondence_exponent(rand_cfg(), barM, M) in (1, 2)

    def time_symmetry():
        barMinv = invert(barM)
        from .core import step_head
        for _ in range(300):
            z = rand_cfg(bg=rng.choice((0, 1)))
            assert sigma(step_head(barMinv, sigma(z))) == step_head(barM, z)

    def turns():
        for _ in range(50):
            ev = classify_turns(barM, rand_cfg(), 300)
            for x, y in zip(ev, ev[1:]):
                assert not (x.kind == "right" and y.kind == "right")

    def containment():
        for _ in range(40):
            ones = frozenset((rng.randrange(0, 8), rng.randrange(0, 8))
                             for _ in range(rng.randrange(0, 12)))
            cfg = SparseConfig(ones, 0, (rng.choice("NESW"),
                                         (rng.randrange(0, 8),
                                          rng.randrange(0, 8))))
            containment_check(M, cfg, 800, Region(0, 7, 0, 7))

    def potential_law():
        from .core import _RunState
        from .machines import LEFT
        nn = 6
        for _ in range(60):
            ones = frozenset((rng.randrange(1, nn + 1),
                              rng.randrange(1, nn + 1))
                             for _ in range(rng.randrange(0, 8)))
            st = _RunState(barM, SparseConfig(
                ones, 0, (rng.choice("NESW"),
                          (rng.randrange(1, nn + 1),
                           rng.randrange(1, nn + 1)))))
            for _t in range(120):
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

    suites = {
        "reversibility": reversibility,
        "conservation": conservation,
        "correspondence": correspondence,
        "sigma": time_symmetry,
        "turns": turns,
        "containment": containment,
        "potential": potential_law,
    }
    wanted = suites if args.suite == "core" else {args.suite:
                                                  suites[args.suite]}
    for name, fn in wanted.items():
        check(name, fn)
    return 1 if failures else 0


def cmd_compile_circuit(args) -> int:
    from .circuits import compile_to_network, evaluate, parse_circuit
    from .layout import layout_network, verify_layout
    circuit = parse_circuit(Path(args.circuit).read_text())
    compiled = compile_to_network(circuit)
    print(f"circuit: {circuit.size} gates, arity {circuit.k_in}")
    print(f"network: {compiled.size} primitive components, "
          f"transition weight {compiled.transition_weight}")
    for bits in range(1 << circuit.k_in):
        w = [(bits >> j) & 1 for j in range(circuit.k_in)]
        v, weight = compiled.run_protocol(w)
        assert v == evaluate(circuit, w)
        print(f"  {''.join(map(str, w))} -> {''.join(map(str, v))}"
              f"  (weight {weight})")
    if args.layout:
        lay = layout_network(compiled.network, name="circuit")
        checked = verify_layout(lay, max_len=1)
        print(f"tape layout: {lay.width}x{lay.height}, e={lay.e}, "
              f"c={lay.c}; verified {checked} transitions")
        print(lay.manifest.text(), end="")
    return 0


def cmd_gadget(args) -> int:
    from .gadgets import GADGET_FACTORIES, merge_gadget_raw
    names = {"merge": "m2", "switch": "s(1,1)", "trivial": "m1"}
    if args.name == "merge":
        raw = merge_gadget_raw()
        print(f"(6,8,11)-simulation; padded to c={raw.c * 2 + 1}")
    sim = GADGET_FACTORIES[names[args.name]]()
    print(f"{args.name}: {sim.width}x{sim.height}, c={sim.c} "
          "(construction self-test passed)")
    print(render_text(sim.config(),
                      (-1, sim.width, -1, sim.height)), end="")
    return 0


def cmd_catcher_demo(args) -> int:
    from .catchers import (activation_steps, catcher_activated_cells,
                           catcher_cells)
    a, n = args.a, args.n
    inactive = SparseConfig(catcher_cells(a, n))
    active = SparseConfig(catcher_activated_cells(a, n))
    print(f"inactive ({a},{n})-catcher:")
    print(render_text(inactive), end="")
    print(f"activation takes {activation_steps(a, n)} steps; result:")
    print(render_text(active), end="")
    return 0


def cmd_kshape(args) -> int:
    barM = build_barM()
    if args.measure:
        pts = []
        print("   n      side      tau     bound")
        for nn in (4, 8, 16, 32) if args.n is None else (args.n,):
            tau, reg = kshape_escape_time(barM, nn, nn)
            ok = tau >= nn ** 3 and reg.side <= 7 * nn
            pts.append((math.log(nn), math.log(tau)))
            print(f"{nn:4d}  {reg.side:8d} {tau:8d}  >= {nn**3}"
                  f" {'ok' if ok else 'FAIL'}")
            if not ok:
                return 1
        if len(pts) > 1:
            k = len(pts)
            sx = sum(x for x, _ in pts)
            sy = sum(y for _, y in pts)
            sxx = sum(x * x for x, _ in pts)
            sxy = sum(x * y for x, y in pts)
            slope = (k * sxy - sx * sy) / (k * sxx - sx * sx)
            print(f"log-log slope: {slope:.3f}")
        return 0
    print(serialize_pattern(kshape(args.n or 4, args.b)), end="")
    return 0


def cmd_export_golly(args) -> int:
    print(export_golly_rule(), end="")
    return 0


def cmd_export_kshape(args) -> int:
    print(export_kshape_script(args.a, args.b), end="")
    return 0


def cmd_pu_build(args) -> int:
    from .stages import BudgetExceeded, pu_transform
    patterns = [parse_pattern(p.read_text())
                for p in sorted(Path(args.patterns).glob("*.pat"))]
    mapping = json.loads(Path(args.map).read_text())

    def g(i):
        return parse_pattern(mapping[str(i)])

    try:
        real = pu_transform(patterns, g, budget=args.budget)
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}")
        return 1
    print(f"realized; clock constant {real.constant}")
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="turmite-pu")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("simulate")
    p.add_argument("pattern")
    p.add_argument("--machine", default="M", choices=["M", "barM", "Minv"])
    p.add_argument("--model", default="head", choices=["head", "tape"])
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--trace")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("escape")
    p.add_argument("pattern")
    p.add_argument("--machine", default="M", choices=["M", "barM", "Minv"])
    p.add_argument("--region", required=True, help="xmin,xmax,ymin,ymax")
    p.add_argument("--cap", type=int)
    p.set_defaults(fn=cmd_escape)

    p = sub.add_parser("verify")
    p.add_argument("suite", nargs="?", default="core")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("compile-circuit")
    p.add_argument("circuit")
    p.add_argument("--layout", action="store_true")
    p.set_defaults(fn=cmd_compile_circuit)

    p = sub.add_parser("gadget")
    p.add_argument("name", choices=["merge", "switch", "trivial"])
    p.set_defaults(fn=cmd_gadget)

    p = sub.add_parser("catcher-demo")
    p.add_argument("--a", type=int, default=1)
    p.add_argument("--n", type=int, default=3)
    p.set_defaults(fn=cmd_catcher_demo)

    p = sub.add_parser("kshape")
    p.add_argument("--n", type=int)
    p.add_argument("--b", type=int, default=0)
    p.add_argument("--measure", action="store_true")
    p.set_defaults(fn=cmd_kshape)

    p = sub.add_parser("export-golly-rule")
    p.set_defaults(fn=cmd_export_golly)

    p = sub.add_parser("export-kshape")
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.set_defaults(fn=cmd_export_kshape)

    p = sub.add_parser("pu-build")
    p.add_argument("--patterns", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--budget", type=int, default=500_000)
    p.set_defaults(fn=cmd_pu_build)

    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
