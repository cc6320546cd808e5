"""Core automata model: read/write actions, FSMs, PDMs and the leader/property product.

A network couples one leader machine and arbitrarily many copies of a
contributor machine through a shared register holding values from a finite
domain G.  The register starts out uninitialized, which we represent with the
out-of-band marker ``#``; that marker never appears as the value of a read or
write action.
"""

from __future__ import annotations

from dataclasses import dataclass, field

#: marker for the uninitialized store; not a member of G
UNINIT = "#"

LEADER = "leader"
CONTRIBUTOR = "contributor"

READ = "read"
WRITE = "write"


class BudgetExceeded(Exception):
    """Raised when a search or solver exceeds its configured budget."""


@dataclass(frozen=True)
class Action:
    role: str          # LEADER or CONTRIBUTOR
    kind: str          # READ or WRITE
    value: str

    def __post_init__(self):
        if self.role not in (LEADER, CONTRIBUTOR):
            raise ValueError(f"bad role {self.role!r}")
        if self.kind not in (READ, WRITE):
            raise ValueError(f"bad kind {self.kind!r}")
        if self.value == UNINIT:
            raise ValueError("action value may not be the uninitialized marker")

    def __str__(self):
        letter = "r" if self.kind == READ else "w"
        return f"{letter}({self.value})"


@dataclass(frozen=True)
class Fsm:
    """Finite-state machine; with an accepting set it is a Buchi automaton."""

    states: frozenset
    initial: object
    transitions: tuple     # of (src, Action, dst)
    accepting: frozenset | None = None

    def is_buchi(self):
        return self.accepting is not None


@dataclass(frozen=True)
class PdmRule:
    src: object
    action: Action
    top: str               # stack symbol the rule fires on
    dst: object
    effect: tuple          # ("push", symbol) or ("pop",)


@dataclass(frozen=True)
class Pdm:
    """Pushdown machine.  stack_alphabet[0] is the bottom symbol.

    A push rule applied to top gamma yields stack gamma' gamma w (gamma is
    retained below the pushed symbol); a pop rule removes gamma.
    """

    states: frozenset
    stack_alphabet: tuple
    initial: object
    rules: tuple           # of PdmRule
    accepting: frozenset | None = None

    @property
    def bottom(self):
        return self.stack_alphabet[0]

    def is_buchi(self):
        return self.accepting is not None


@dataclass(frozen=True)
class Transition:
    """A leader or contributor transition with a stable identity.

    The tid is unique across the union of both machines' transitions and is
    used as a letter in cycle automata and as a constraint-variable index.
    """

    owner: str             # LEADER or CONTRIBUTOR
    tid: str
    payload: object        # an Fsm transition triple or a PdmRule

    @property
    def action(self):
        if isinstance(self.payload, PdmRule):
            return self.payload.action
        return self.payload[1]

    @property
    def src(self):
        if isinstance(self.payload, PdmRule):
            return self.payload.src
        return self.payload[0]

    @property
    def dst(self):
        if isinstance(self.payload, PdmRule):
            return self.payload.dst
        return self.payload[2]


def validate(machine, values):
    """Check a machine's structural invariants against the value domain.

    Returns a list of diagnostic strings; errors are prefixed with "error:",
    warnings with "warning:".  An empty list means the machine is well formed
    and uses every declared value.
    """
    diags = []
    if UNINIT in values:
        diags.append("error: value domain contains the uninitialized marker")
    if not values:
        diags.append("error: value domain is empty")
    if machine.initial not in machine.states:
        diags.append(f"error: initial state {machine.initial!r} not declared")

    roles = set()
    used_values = set()

    if isinstance(machine, Fsm):
        for src, act, dst in machine.transitions:
            if src not in machine.states:
                diags.append(f"error: transition source {src!r} not declared")
            if dst not in machine.states:
                diags.append(f"error: transition target {dst!r} not declared")
            if act.value not in values:
                diags.append(f"error: transition uses undeclared value {act.value!r}")
            roles.add(act.role)
            used_values.add(act.value)
    else:
        alphabet = set(machine.stack_alphabet)
        if len(alphabet) != len(machine.stack_alphabet):
            diags.append("error: duplicate stack symbols")
        for rule in machine.rules:
            if rule.src not in machine.states:
                diags.append(f"error: rule source {rule.src!r} not declared")
            if rule.dst not in machine.states:
                diags.append(f"error: rule target {rule.dst!r} not declared")
            if rule.top not in alphabet:
                diags.append(f"error: rule top symbol {rule.top!r} not declared")
            if rule.action.value not in values:
                diags.append(f"error: rule uses undeclared value {rule.action.value!r}")
            if rule.effect[0] == "push":
                if rule.effect[1] == machine.bottom:
                    diags.append("error: bottom symbol may not be pushed")
                elif rule.effect[1] not in alphabet:
                    diags.append(f"error: pushed symbol {rule.effect[1]!r} not declared")
            elif rule.effect[0] != "pop":
                diags.append(f"error: bad rule effect {rule.effect!r}")
            roles.add(rule.action.role)
            used_values.add(rule.action.value)

    if machine.accepting is not None:
        for q in machine.accepting:
            if q not in machine.states:
                diags.append(f"error: accepting state {q!r} not declared")
    if len(roles) > 1:
        diags.append("error: machine mixes leader and contributor actions")
    for v in sorted(set(values) - used_values):
        diags.append(f"warning: value {v!r} unused")
    return diags


def buchi_product(prop, leader):
    """Product of a Buchi property automaton with the leader machine.

    Both run over the leader alphabet.  A product state is accepting iff its
    property component is accepting; when the leader itself carries a Buchi
    set, a one-bit phase counter degeneralizes the two acceptance sets so the
    product accepts exactly the intersection of the two omega-languages.
    """
    if prop.accepting is None:
        raise ValueError("property automaton must have an accepting set")
    degen = leader.accepting is not None

    def step_phase(phase, a, d):
        if phase == 0 and a in prop.accepting:
            return 1
        if phase == 1 and d in leader.accepting:
            return 0
        return phase

    if degen:
        states = frozenset(
            (a, d, i) for a in prop.states for d in leader.states for i in (0, 1))
        initial = (prop.initial, leader.initial, 0)
        accepting = frozenset(
            (a, d, 0) for a in prop.states if a in prop.accepting
            for d in leader.states)
    else:
        states = frozenset((a, d) for a in prop.states for d in leader.states)
        initial = (prop.initial, leader.initial)
        accepting = frozenset(
            (a, d) for a in prop.states if a in prop.accepting
            for d in leader.states)

    by_action = {}
    for a_src, act, a_dst in prop.transitions:
        if act.role != LEADER:
            raise ValueError("property automaton must use leader actions")
        by_action.setdefault(act, []).append((a_src, a_dst))

    if isinstance(leader, Fsm):
        transitions = []
        for d_src, act, d_dst in leader.transitions:
            if act.role != LEADER:
                raise ValueError("leader machine must use leader actions")
            for a_src, a_dst in by_action.get(act, ()):
                if degen:
                    for i in (0, 1):
                        src = (a_src, d_src, i)
                        dst = (a_dst, d_dst, step_phase(i, a_src, d_src))
                        transitions.append((src, act, dst))
                else:
                    transitions.append(((a_src, d_src), act, (a_dst, d_dst)))
        return Fsm(states, initial, tuple(transitions), accepting)

    rules = []
    for rule in leader.rules:
        if rule.action.role != LEADER:
            raise ValueError("leader machine must use leader actions")
        for a_src, a_dst in by_action.get(rule.action, ()):
            if degen:
                for i in (0, 1):
                    src = (a_src, rule.src, i)
                    dst = (a_dst, rule.dst, step_phase(i, a_src, rule.src))
                    rules.append(PdmRule(src, rule.action, rule.top, dst, rule.effect))
            else:
                rules.append(PdmRule((a_src, rule.src), rule.action, rule.top,
                                     (a_dst, rule.dst), rule.effect))
    return Pdm(states, leader.stack_alphabet, initial, tuple(rules), accepting)


@dataclass(frozen=True)
class Network:
    """A fully assembled network: value domain, Buchi leader (already the
    property product), contributor machine, and stably numbered transitions."""

    values: frozenset
    leader: object         # Buchi Fsm or Buchi Pdm
    contributor: object    # Fsm or Pdm
    leader_transitions: tuple = field(default=())
    contributor_transitions: tuple = field(default=())

    def transition(self, tid):
        return self._by_tid[tid]

    @property
    def _by_tid(self):
        # lazy index; dataclass is frozen so stash via object.__setattr__
        cache = self.__dict__.get("_tid_cache")
        if cache is None:
            cache = {t.tid: t
                     for t in self.leader_transitions + self.contributor_transitions}
            object.__setattr__(self, "_tid_cache", cache)
        return cache

    def leader_is_pdm(self):
        return isinstance(self.leader, Pdm)

    def contributor_is_pdm(self):
        return isinstance(self.contributor, Pdm)


def make_network(values, leader, contributor):
    """Assemble a network, assigning transition ids d0,d1,... and c0,c1,...

    The leader must already carry a Buchi acceptance condition (apply
    buchi_product first if the property is separate).
    """
    if leader.accepting is None:
        raise ValueError("leader must carry a Buchi acceptance condition")
    if isinstance(leader, Pdm):
        lts = tuple(Transition(LEADER, f"d{i}", r) for i, r in enumerate(leader.rules))
    else:
        lts = tuple(Transition(LEADER, f"d{i}", t)
                    for i, t in enumerate(leader.transitions))
    if isinstance(contributor, Pdm):
        cts = tuple(Transition(CONTRIBUTOR, f"c{i}", r)
                    for i, r in enumerate(contributor.rules))
    else:
        cts = tuple(Transition(CONTRIBUTOR, f"c{i}", t)
                    for i, t in enumerate(contributor.transitions))
    return Network(frozenset(values), leader, contributor, lts, cts)
