"""Weighted sequential automata and the token-circuit algebra.

An s-automaton is a deterministic weighted transducer used as a circuit
component: a single token enters through an input terminal and leaves
through an output terminal, updating the internal state.  Networks are
built from primitive components by products and feedbacks; large networks
keep their state structurally (one state per component) so that feedback
chasing stays tractable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

Weight = Fraction


class UndefinedWord(Exception):
    """The extended transition function is undefined on the given word."""

    def __init__(self, prefix: int, message: str = ""):
        super().__init__(message or f"undefined after {prefix} letters")
        self.prefix = prefix


@dataclass(frozen=True)
class SAutomaton:
    """A deterministic weighted sequential automaton.

    ``delta`` and ``mu`` are partial maps on (state, input terminal) with
    identical domains.
    """

    name: str
    states: tuple
    inputs: frozenset
    outputs: frozenset
    delta: Mapping[tuple, tuple]
    mu: Mapping[tuple, Weight]

    def __post_init__(self):
        if self.inputs & self.outputs:
            raise ValueError("input and output terminals must be disjoint")
        if set(self.delta) != set(self.mu):
            raise ValueError("mu must be defined exactly where delta is")
        states = set(self.states)
        for (q, i), (p, o) in self.delta.items():
            if q not in states or p not in states:
                raise ValueError("transition uses unknown state")
            if i not in self.inputs or o not in self.outputs:
                raise ValueError("transition uses unknown terminal")

    def step(self, q, letter):
        key = (q, letter)
        if key not in self.delta:
            raise UndefinedWord(0)
        p, o = self.delta[key]
        return p, o, self.mu[key]


@dataclass(frozen=True)
class RunResult:
    state: object
    outputs: tuple
    weight: Weight


def run_word(A, q, word: Iterable) -> RunResult:
    """Left fold of the transition function; weights add up.

    Raises UndefinedWord carrying the length of the defined prefix.
    """
    outs = []
    w = Fraction(0)
    for k, letter in enumerate(word):
        try:
            q, o, dw = A.step(q, letter)
        except UndefinedWord:
            raise UndefinedWord(k) from None
        outs.append(o)
        w += dw
    return RunResult(q, tuple(outs), w)


def product(A: SAutomaton, B: SAutomaton) -> SAutomaton:
    """Parallel composition on disjoint terminal sets."""
    if (A.inputs | A.outputs) & (B.inputs | B.outputs):
        raise ValueError("product needs disjoint terminals; rename first")
    states = tuple((qa, qb) for qa in A.states for qb in B.states)
    delta = {}
    mu = {}
    for qa in A.states:
        for qb in B.states:
            for i in A.inputs:
                if (qa, i) in A.delta:
                    p, o = A.delta[(qa, i)]
                    delta[((qa, qb), i)] = ((p, qb), o)
                    mu[((qa, qb), i)] = A.mu[(qa, i)]
            for i in B.inputs:
                if (qb, i) in B.delta:
                    p, o = B.delta[(qb, i)]
                    delta[((qa, qb), i)] = ((qa, p), o)
                    mu[((qa, qb), i)] = B.mu[(qb, i)]
    return SAutomaton(
        name=f"({A.name}x{B.name})",
        states=states,
        inputs=A.inputs | B.inputs,
        outputs=A.outputs | B.outputs,
        delta=delta,
        mu=mu,
    )


def feedback(A: SAutomaton, i, o) -> SAutomaton:
    """Connect output o back into input i and hide both terminals.

    A transition that would emit o is chased through i until a different
    output appears; weights accumulate along the chase.  A chase that
    cycles (live lock) leaves the transition undefined, matching the
    partial-function semantics.
    """
    if i not in A.inputs or o not in A.outputs:
        raise ValueError("feedback terminals not present")
    delta = {}
    mu = {}
    bound = len(A.states) + 1
    for (q, inp), (p, out) in A.delta.items():
        if inp == i:
            continue
        w = A.mu[(q, inp)]
        steps = 0
        while out == o:
            steps += 1
            if steps > bound or (p, i) not in A.delta:
                p = None
                break
            w = w + A.mu[(p, i)]
            p, out = A.delta[(p, i)]
        if p is None or out == o:
            continue
        delta[(q, inp)] = (p, out)
        mu[(q, inp)] = w
    return SAutomaton(
        name=f"{A.name}[{o}>>{i}]",
        states=A.states,
        inputs=A.inputs - {i},
        outputs=A.outputs - {o},
        delta=delta,
        mu=mu,
    )


def rename_terminals(A: SAutomaton, mapping: Mapping) -> SAutomaton:
    """Rename terminals; identifiers absent from the mapping are kept."""
    def r(t):
        return mapping.get(t, t)

    return SAutomaton(
        name=A.name,
        states=A.states,
        inputs=frozenset(r(t) for t in A.inputs),
        outputs=frozenset(r(t) for t in A.outputs),
        delta={(q, r(i)): (p, r(o)) for (q, i), (p, o) in A.delta.items()},
        mu={(q, r(i)): w for (q, i), w in A.mu.items()},
    )


# ---------------------------------------------------------------------------
# primitive components

def n_merge(n: int) -> SAutomaton:
    """Funnel n single-use inputs into one output; weight max(1, n-1)."""
    if n < 1:
        raise ValueError("merge arity must be positive")
    inputs = ("i",) if n == 1 else tuple(f"i{j}" for j in range(n))
    delta = {("a", i): ("b", "o") for i in inputs}
    w = Fraction(max(1, n - 1))
    return SAutomaton(
        name=f"m{n}",
        states=("a", "b"),
        inputs=frozenset(inputs),
        outputs=frozenset({"o"}),
        delta=delta,
        mu={k: w for k in delta},
    )


def trivial_merge() -> SAutomaton:
    return n_merge(1)


def disposable_merge() -> SAutomaton:
    return n_merge(2)


def switch(n: int, k: int) -> SAutomaton:
    """Latch one bit through any of n set-inputs; k single-use read ports.

    State a^N_x records the unread port set N and the bit x.  Weight is
    the constant max(n, k(k-1)-1).
    """
    if n < 1 or k < 1:
        raise ValueError("switch arities must be positive")
    full = frozenset(range(k))

    def st(N: frozenset, x: int):
        return (tuple(sorted(N)), x)

    set_inputs = ("i",) if n == 1 else tuple(f"i{j}" for j in range(n))
    read_inputs = ("i'",) if k == 1 else tuple(f"i'{j}" for j in range(k))
    set_outputs = ("o",) if n == 1 else tuple(f"o{j}" for j in range(n))

    def read_output(j: int, x: int) -> str:
        return f"o'({x})" if k == 1 else f"o'{j}({x})"

    states = []
    for x in (0, 1):
        for mask in range(1 << k):
            N = frozenset(j for j in range(k) if (mask >> j) & 1)
            states.append(st(N, x))
    delta = {}
    for j, inp in enumerate(set_inputs):
        delta[(st(full, 0), inp)] = (st(full, 1), set_outputs[j])
    for x in (0, 1):
        for mask in range(1 << k):
            N = frozenset(jj for jj in range(k) if (mask >> jj) & 1)
            for j in N:
                delta[(st(N, x), read_inputs[j])] = \
                    (st(N - {j}, x), read_output(j, x))
    w = Fraction(max(n, k * (k - 1) - 1))
    return SAutomaton(
        name=f"s({n},{k})",
        states=tuple(states),
        inputs=frozenset(set_inputs) | frozenset(read_inputs),
        outputs=frozenset(set_outputs) | frozenset(
            read_output(j, x) for j in range(k) for x in (0, 1)),
        delta=delta,
        mu={key: w for key in delta},
    )


def disposable_switch() -> SAutomaton:
    return switch(1, 1)


SWITCH_INITIAL = ((0,), 0)   # state a_0 of the (1,1)-switch
MERGE_INITIAL = "a"


def is_primitive(A: SAutomaton) -> bool:
    return A.name in ("m1", "m2", "s(1,1)")


# ---------------------------------------------------------------------------
# structural networks

@dataclass
class Network:
    """A normed network kept structurally: components, wiring, terminals.

    Semantically this is the automaton obtained by taking the product of
    all components (with path-prefixed terminals) and one feedback per
    wire; ``flatten`` realizes that literally for small networks.
    """

    components: dict[str, SAutomaton] = field(default_factory=dict)
    initial: dict[str, object] = field(default_factory=dict)
    wires: dict[tuple[str, str], tuple[str, str]] = field(default_factory=dict)
    ext_in: dict[str, tuple[str, str]] = field(default_factory=dict)
    ext_out: dict[tuple[str, str], str] = field(default_factory=dict)
    name: str = "net"

    # -- construction ------------------------------------------------------

    def add(self, path: str, comp: SAutomaton, initial) -> str:
        if path in self.components:
            raise ValueError(f"duplicate component path {path!r}")
        self.components[path] = comp
        self.initial[path] = initial
        return path

    def connect(self, src: tuple[str, str], dst: tuple[str, str]) -> None:
        sp, so = src
        dp, di = dst
        if so not in self.components[sp].outputs:
            raise ValueError(f"{src} is not an output")
        if di not in self.components[dp].inputs:
            raise ValueError(f"{dst} is not an input")
        if src in self.wires or src in self.ext_out:
            raise ValueError(f"{src} already connected")
        if dst in self.wires.values() or dst in self.ext_in.values():
            raise ValueError(f"{dst} already connected")
        self.wires[src] = dst

    def expose_input(self, name: str, dst: tuple[str, str]) -> None:
        if name in self.ext_in:
            raise ValueError(f"duplicate external input {name!r}")
        self.ext_in[name] = dst

    def expose_output(self, src: tuple[str, str], name: str) -> None:
        if src in self.wires or src in self.ext_out:
            raise ValueError(f"{src} already connected")
        self.ext_out[src] = name

    def pad_chain(self, length: int, prefix: str) -> tuple:
        """A chain of trivial merges; returns (first input, last output)."""
        assert length >= 1
        prev = None
        first = None
        for j in range(length):
            p = self.add(f"{prefix}.t{j}", trivial_merge(), MERGE_INITIAL)
            if prev is not None:
                self.connect((prev, "o"), (p, "i"))
            else:
                first = (p, "i")
            prev = p
        return first, (prev, "o")

    # -- automaton protocol --------------------------------------------------

    @property
    def inputs(self) -> frozenset:
        return frozenset(self.ext_in)

    @property
    def outputs(self) -> frozenset:
        return frozenset(self.ext_out.values())

    @property
    def size(self) -> int:
        return len(self.components)

    def initial_state(self) -> dict:
        return dict(self.initial)

    def step(self, state: Mapping, letter):
        """One token walk; returns (new state, external output, weight)."""
        if letter not in self.ext_in:
            raise UndefinedWord(0, f"unknown input {letter!r}")
        new_state = dict(state)
        path, term = self.ext_in[letter]
        weight = Fraction(0)
        bound = sum(len(c.delta) for c in self.components.values()) + 1
        for _ in range(bound):
            comp = self.components[path]
            key = (new_state[path], term)
            if key not in comp.delta:
                raise UndefinedWord(0)
            p, out = comp.delta[key]
            weight += comp.mu[key]
            new_state[path] = p
            src = (path, out)
            if src in self.ext_out:
                return new_state, self.ext_out[src], weight
            if src in self.wires:
                path, term = self.wires[src]
                continue
            raise UndefinedWord(0, f"token fell off at {src}")
        raise UndefinedWord(0, "live lock in token walk")

    def token_trace(self, state: Mapping, letter) -> list[str]:
        """Component paths visited by one token, in order."""
        trace = []
        new_state = dict(state)
        path, term = self.ext_in[letter]
        bound = sum(len(c.delta) for c in self.components.values()) + 1
        for _ in range(bound):
            comp = self.components[path]
            key = (new_state[path], term)
            if key not in comp.delta:
                raise UndefinedWord(0)
            p, out = comp.delta[key]
            trace.append(path)
            new_state[path] = p
            src = (path, out)
            if src in self.ext_out:
                return trace
            if src in self.wires:
                path, term = self.wires[src]
                continue
            raise UndefinedWord(0)
        raise UndefinedWord(0, "live lock in token walk")

    def flatten(self) -> tuple[SAutomaton, object]:
        """Literal product-and-feedback realization (small networks only).

        Returns the flat automaton and its initial state.
        """
        paths = sorted(self.components)
        flat: Optional[SAutomaton] = None
        init = None
        for p in paths:
            comp = rename_terminals(
                self.components[p],
                {t: f"{p}:{t}" for t in
                 (self.components[p].inputs | self.components[p].outputs)})
            if flat is None:
                flat, init = comp, self.initial[p]
            else:
                flat = product(flat, comp)
                init = (init, self.initial[p])
        assert flat is not None, "empty network"
        for (sp, so), (dp, di) in self.wires.items():
            flat = feedback(flat, f"{dp}:{di}", f"{sp}:{so}")
        rename = {}
        for name, (dp, di) in self.ext_in.items():
            rename[f"{dp}:{di}"] = name
        for (sp, so), name in self.ext_out.items():
            rename[f"{sp}:{so}"] = name
        flat = rename_terminals(flat, rename)
        keep_in = frozenset(self.ext_in)
        extra_in = flat.inputs - keep_in
        # unconnected internal inputs are dead; hide them
        delta = {k: v for k, v in flat.delta.items() if k[1] in keep_in}
        flat = SAutomaton(self.name + ".flat", flat.states, keep_in,
                          flat.outputs,
                          delta, {k: flat.mu[k] for k in delta})
        return flat, init


def run_network_word(net: Network, state: Mapping, word) -> RunResult:
    outs = []
    w = Fraction(0)
    for k, letter in enumerate(word):
        try:
            state, o, dw = net.step(state, letter)
        except UndefinedWord:
            raise UndefinedWord(k) from None
        outs.append(o)
        w += dw
    return RunResult(state, tuple(outs), w)


def _freeze(state):
    if isinstance(state, dict):
        return tuple(sorted(state.items()))
    return state


def simulates(A, qa, B, qb, max_len: int = 0,
              return_witness: bool = False):
    """Does A from qa simulate B from qb?

    Checks every B-defined word (output letters and cumulative weights
    must agree; A may accept strictly more).  Exhaustive over the
    reachable joint state space, so the verdict holds for all word
    lengths; max_len, when positive, only bounds the search depth.
    """
    def a_step(state, letter):
        if isinstance(A, Network):
            return A.step(state, letter)
        return A.step(state, letter)

    def b_step(state, letter):
        if isinstance(B, Network):
            return B.step(state, letter)
        return B.step(state, letter)

    letters = sorted(B.ext_in) if isinstance(B, Network) else sorted(B.inputs)
    seen = set()
    stack = [(qb, qa, (), 0)]
    while stack:
        sb, sa, word, depth = stack.pop()
        key = (_freeze(sb), _freeze(sa))
        if key in seen:
            continue
        seen.add(key)
        if max_len and depth >= max_len:
            continue
        for letter in letters:
            try:
                nb, ob, wb = b_step(sb, letter)
            except UndefinedWord:
                continue
            try:
                na, oa, wa = a_step(sa, letter)
            except UndefinedWord:
                return (False, word + (letter,)) if return_witness else False
            if oa != ob or wa != wb:
                return (False, word + (letter,)) if return_witness else False
            stack.append((nb, na, word + (letter,), depth + 1))
    return (True, None) if return_witness else True


def max_transition_weight(net: Network, enforce_bound: bool = True) -> Weight:
    """Maximum weight over reachable single-input transitions.

    For a normed network over the three primitive components the weight
    of any transition is at most twice the component count (each has
    weight 1 and a token passes each at most twice); the bound is
    asserted unless disabled.
    """
    best = Fraction(0)
    seen = set()
    stack = [net.initial_state()]
    while stack:
        state = stack.pop()
        key = _freeze(state)
        if key in seen:
            continue
        seen.add(key)
        for letter in net.ext_in:
            try:
                nxt, _, w = net.step(state, letter)
            except UndefinedWord:
                continue
            best = max(best, w)
            stack.append(nxt)
    if enforce_bound and all(is_primitive(c)
                             for c in net.components.values()):
        if best > 2 * net.size:
            raise AssertionError(
                f"transition weight {best} exceeds 2*size={2 * net.size}")
    return best


# ---------------------------------------------------------------------------
# derived constructions

def build_n_merge_network(n: int) -> tuple[Network, int]:
    """Simulate the n-merge with 2-merges plus trivial padding.

    Comb shape: every accepted path passes exactly max(1, n-1) primitive
    components, matching the n-merge's constant weight.  Returns the
    network and the common path length.
    """
    net = Network(name=f"merge{n}")
    if n == 1:
        t = net.add("t", trivial_merge(), MERGE_INITIAL)
        net.expose_input("i", (t, "i"))
        net.expose_output((t, "o"), "o")
        return net, 1
    for j in range(1, n):
        net.add(f"m{j}", disposable_merge(), MERGE_INITIAL)
        if j > 1:
            net.connect((f"m{j-1}", "o"), (f"m{j}", "i0"))
    net.expose_output((f"m{n-1}", "o"), "o")

    def attach(ext: str, dst: tuple[str, str], pad: int):
        if pad == 0:
            net.expose_input(ext, dst)
        else:
            first, last = net.pad_chain(pad, f"pad.{ext}")
            net.expose_input(ext, first)
            net.connect(last, dst)

    attach("i0", ("m1", "i0"), 0)
    attach("i1", ("m1", "i1"), 0)
    for j in range(2, n):
        attach(f"i{j}", (f"m{j}", "i1"), j - 1)
    return net, n - 1


def switch_network_weight(n: int, k: int) -> int:
    """Smallest constant path length achievable by the grid construction,
    never below the switch's declared weight."""
    declared = max(n, k * (k - 1) - 1)
    feasible = max(k, n + 1 if n >= 2 else n)
    return max(declared, feasible)


def build_switch_network(n: int, k: int) -> tuple[Network, int]:
    """Simulate the (n,k)-switch with nk unit switches, k merge combs and
    trivial padding.

    Row r stores the bit for set-input r; its set token runs through all
    k columns.  A read token chases down a column through o'(0) exits
    until it finds the latched row (or falls out the bottom).  All paths
    are padded to one common length; when the declared weight
    max(n, k(k-1)-1) is achievable it is used, otherwise the minimal
    feasible constant is (the simulation then matches a reweighted
    switch; see ``switch_network_weight``).
    """
    W = switch_network_weight(n, k)
    net = Network(name=f"switch{n}x{k}")
    s0 = SWITCH_INITIAL
    for r in range(n):
        for c in range(k):
            net.add(f"s{r}.{c}", disposable_switch(), s0)

    def pad_between(src, dst, count, tag):
        if count == 0:
            net.connect(src, dst)
        else:
            first, last = net.pad_chain(count, f"pad.{tag}")
            net.connect(src, first)
            net.connect(last, dst)

    def attach_in(ext, dst, pad, tag):
        if pad == 0:
            net.expose_input(ext, dst)
        else:
            first, last = net.pad_chain(pad, f"pad.{tag}")
            net.expose_input(ext, first)
            net.connect(last, dst)

    def attach_out(src, ext, pad, tag):
        if pad == 0:
            net.expose_output(src, ext)
        else:
            first, last = net.pad_chain(pad, f"pad.{tag}")
            net.connect(src, first)
            net.expose_output(last, ext)

    # set rows: i_r -> s[r][0] -> ... -> s[r][k-1] -> o_r
    for r in range(n):
        ext_i = "i" if n == 1 else f"i{r}"
        ext_o = "o" if n == 1 else f"o{r}"
        attach_in(ext_i, (f"s{r}.0", "i"), 0, f"set{r}")
        for c in range(1, k):
            net.connect((f"s{r}.{c-1}", "o"), (f"s{r}.{c}", "i"))
        attach_out((f"s{r}.{k-1}", "o"), ext_o, W - k, f"set{r}")

    # read columns
    for c in range(k):
        ext_r = "i'" if k == 1 else f"i'{c}"
        out0 = "o'(0)" if k == 1 else f"o'{c}(0)"
        out1 = "o'(1)" if k == 1 else f"o'{c}(1)"
        attach_in(ext_r, (f"s0.{c}", "i'"), 0, f"read{c}")
        for r in range(1, n):
            net.connect((f"s{r-1}.{c}", "o'(0)"), (f"s{r}.{c}", "i'"))
        attach_out((f"s{n-1}.{c}", "o'(0)"), out0, W - n, f"miss{c}")
        if n == 1:
            attach_out((f"s0.{c}", "o'(1)"), out1, W - 1, f"hit{c}")
            continue
        # comb of n-1 merges: slots b0,b1 at depth n-1, b_j at depth n-j
        for j in range(1, n):
            net.add(f"c{c}.m{j}", disposable_merge(), MERGE_INITIAL)
            if j > 1:
                net.connect((f"c{c}.m{j-1}", "o"), (f"c{c}.m{j}", "i0"))
        attach_out((f"c{c}.m{n-1}", "o"), out1, 0, f"hit{c}")
        pad_between((f"s0.{c}", "o'(1)"), (f"c{c}.m1", "i0"),
                    W - n, f"hit{c}r0")
        pad_between((f"s1.{c}", "o'(1)"), (f"c{c}.m1", "i1"),
                    W - (n + 1), f"hit{c}r1")
        for r in range(2, n):
            pad_between((f"s{r}.{c}", "o'(1)"), (f"c{c}.m{r}", "i1"),
                        W - (n + 1), f"hit{c}r{r}")
    return net, W


# ---------------------------------------------------------------------------
# serialization

def automaton_text(A: SAutomaton) -> str:
    """Canonical text dump for golden-file comparisons."""
    lines = [f"automaton {A.name}"]
    lines.append("states " + " ".join(sorted(map(repr, A.states))))
    lines.append("inputs " + " ".join(sorted(A.inputs)))
    lines.append("outputs " + " ".join(sorted(A.outputs)))
    for (q, i), (p, o) in sorted(A.delta.items(), key=repr):
        lines.append(f"  {q!r} --{i}/{o} w={A.mu[(q, i)]}--> {p!r}")
    return "\n".join(lines) + "\n"


def network_text(net: Network) -> str:
    lines = [f"network {net.name} size={net.size}"]
    for p in sorted(net.components):
        lines.append(f"  comp {p}: {net.components[p].name} "
                     f"init={net.initial[p]!r}")
    for (sp, so), (dp, di) in sorted(net.wires.items()):
        lines.append(f"  wire {sp}.{so} -> {dp}.{di}")
    for name, (dp, di) in sorted(net.ext_in.items()):
        lines.append(f"  in {name} -> {dp}.{di}")
    for (sp, so), name in sorted(net.ext_out.items()):
        lines.append(f"  out {sp}.{so} -> {name}")
    return "\n".join(lines) + "\n"
