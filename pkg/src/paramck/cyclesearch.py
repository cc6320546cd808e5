"""Liveness decision for FSM leader / FSM contributor networks.

Strategy: saturate the abstract system, then for every reachable accepting
abstract configuration a build the cycle automaton of moves that keep the
populated-state set Q fixed at Q_a, with a as both entry and exit.  A Parikh
vector of that automaton describes a candidate abstract cycle; it lifts to a
concrete cycle iff the contributor moves are flow-balanced per contributor
state and the cycle is nonempty.  A model is turned into a concrete lasso
witness (stem by backward-demand concretization of the abstract stem, cycle
by an Euler walk) and replayed for confirmation.
"""

from __future__ import annotations

import networkx

from .machines import BudgetExceeded, LEADER, CONTRIBUTOR, READ, WRITE
from .abstraction import (AbstractConfig, contributor_abstract_moves,
                          reachable_abstract, abstract_stem)
from .explicit import Witness, Verdict, replay
from . import parikh


def q_preserving_successors(net, a):
    """Abstract moves from a that leave the populated set unchanged."""
    moves = []
    for t in net.leader_transitions:
        src, act, dst = t.payload
        if src != a.leader_state:
            continue
        if act.kind == READ and a.store != act.value:
            continue
        store = act.value if act.kind == WRITE else a.store
        moves.append((t, AbstractConfig(dst, store, a.Q)))
    for t, store, Q in contributor_abstract_moves(net, a.store, a.Q):
        if Q == a.Q:
            moves.append((t, AbstractConfig(a.leader_state, store, Q)))
    return moves


def build_cycle_fsa(net, a):
    """Automaton over transition ids of the Q-preserving abstract moves
    reachable from a, with a as initial and final state.

    A closed walk through a can only use edges of a's strongly connected
    component, so the automaton is trimmed to it up front; this keeps the
    realizability system small.
    """
    states = [a]
    seen = {a}
    edges = []
    i = 0
    while i < len(states):
        c = states[i]
        i += 1
        for t, c2 in q_preserving_successors(net, c):
            edges.append((c, t.tid, c2))
            if c2 not in seen:
                seen.add(c2)
                states.append(c2)

    graph = networkx.DiGraph()
    graph.add_nodes_from(states)
    graph.add_edges_from((src, dst) for src, _, dst in edges)
    comp = next(c for c in networkx.strongly_connected_components(graph)
                if a in c)
    states = [s for s in states if s in comp]
    edges = [(src, lab, dst) for src, lab, dst in edges
             if src in comp and dst in comp]
    return parikh.Fsa(tuple(states), tuple(edges), a, a)


def realizability_system(net, fsa):
    """Parikh constraints of the cycle automaton strengthened to concrete
    realizability: zero net population change per contributor state, and at
    least one move."""
    tids = [t.tid for t in net.leader_transitions + net.contributor_transitions]
    system = parikh.parikh_fsa(fsa, alphabet=tids)
    extra = []
    for q in net.contributor.states:
        coeffs = {}
        for t in net.contributor_transitions:
            src, _, dst = t.payload
            if src == dst:
                continue
            if dst == q:
                coeffs[parikh.letter_var(t.tid)] = \
                    coeffs.get(parikh.letter_var(t.tid), 0) + 1
            if src == q:
                coeffs[parikh.letter_var(t.tid)] = \
                    coeffs.get(parikh.letter_var(t.tid), 0) - 1
        coeffs = {v: c for v, c in coeffs.items() if c}
        extra.append(parikh.eq(coeffs, 0))
    extra.append(parikh.ge({parikh.letter_var(tid): 1 for tid in tids}, 1))
    return system.conjoin(extra)


class _Sim:
    """Concrete simulation used while laying down witness steps.

    Contributor actors are numbered 1..k; the leader is actor 0.  Firing a
    contributor transition always picks the lowest-numbered actor whose local
    state matches, which is exactly what replay does.
    """

    def __init__(self, net, k):
        from .machines import UNINIT, Pdm
        self.net = net
        self.leader_state = net.leader.initial
        self.leader_stack = (net.leader.bottom,) if isinstance(net.leader, Pdm) \
            else ()
        self.store = UNINIT
        self.locals = [None] + [net.contributor.initial] * k
        self.steps = []

    def fire(self, t):
        from .machines import PdmRule
        if t.owner == LEADER:
            if isinstance(t.payload, PdmRule):
                rule = t.payload
                assert rule.src == self.leader_state
                assert self.leader_stack and rule.top == self.leader_stack[0]
                if rule.action.kind == READ:
                    assert self.store == rule.action.value
                else:
                    self.store = rule.action.value
                if rule.effect[0] == "push":
                    self.leader_stack = (rule.effect[1],) + self.leader_stack
                else:
                    self.leader_stack = self.leader_stack[1:]
                    assert self.leader_stack, "pop would empty the leader stack"
                self.leader_state = rule.dst
                self.steps.append((0, t.tid))
                return
            src, act, dst = t.payload
            assert src == self.leader_state
            if act.kind == READ:
                assert self.store == act.value
            else:
                self.store = act.value
            self.leader_state = dst
            self.steps.append((0, t.tid))
            return
        src, act, dst = t.payload
        actor = next(i for i in range(1, len(self.locals))
                     if self.locals[i] == src)
        if act.kind == READ:
            assert self.store == act.value
        else:
            self.store = act.value
        self.locals[actor] = dst
        self.steps.append((actor, t.tid))


def _stem_multiplicities(net, stem, Q_a, tokens_per_state):
    """Backward-demand pass: how often each stem step fires, and the needed k.

    Walking the abstract stem backwards with demand initialized to the cycle's
    token requirement, a contributor step fires max(demand at its target, 1)
    times: at least once so its store effect survives, and enough times to
    feed every later consumer.  Surplus tokens park on states inside Q_a and
    never move again.  All residual demand lands on the contributor's initial
    state, which fixes the population size.
    """
    demand = {q: tokens_per_state for q in Q_a}
    mults = [1] * len(stem)
    for i in range(len(stem) - 1, -1, -1):
        _, t, _ = stem[i]
        if t.owner != CONTRIBUTOR:
            continue
        src, _, dst = t.payload
        if src == dst:
            continue
        m = max(demand.get(dst, 0), 1)
        mults[i] = m
        demand[dst] = max(demand.get(dst, 0) - m, 0)
        demand[src] = demand.get(src, 0) + m
    k = max(1, demand.get(net.contributor.initial, 0))
    leftovers = {q: d for q, d in demand.items()
                 if d and q != net.contributor.initial}
    assert not leftovers, f"stem demand not closed: {leftovers}"
    return mults, k


def concretize(net, reach, a, fsa, model):
    """Turn a realizability model at accepting configuration a into a concrete
    lasso witness."""
    trail = parikh.euler_witness(fsa, model)
    tokens = sum(model.get(parikh.letter_var(t.tid), 0)
                 for t in net.contributor_transitions)
    stem = abstract_stem(reach, a)
    mults, k = _stem_multiplicities(net, stem, a.Q, tokens)

    sim = _Sim(net, k)
    for (_, t, _), m in zip(stem, mults):
        for _ in range(m if t.owner == CONTRIBUTOR else 1):
            sim.fire(t)
    assert sim.leader_state == a.leader_state and sim.store == a.store
    stem_steps = sim.steps

    sim.steps = []
    for tid in trail:
        sim.fire(net.transition(tid))
    return Witness(k, tuple(stem_steps), tuple(sim.steps), None)


def check_fsm_fsm(net, node_budget=500_000):
    """Decide nonemptiness of the network's accepted omega-language for some
    population size, for FSM leader and FSM contributor."""
    stats = {"abstract_configs": 0, "accepting_checked": 0}
    try:
        reach = reachable_abstract(net)
    except BudgetExceeded:
        return Verdict("BUDGET", None, stats)
    stats["abstract_configs"] = len(reach.order)
    accepting = net.leader.accepting
    for a in reach.order:
        if a.leader_state not in accepting:
            continue
        stats["accepting_checked"] += 1
        fsa = build_cycle_fsa(net, a)
        system = realizability_system(net, fsa)
        try:
            model = parikh.solve(system, node_budget=node_budget)
        except BudgetExceeded:
            return Verdict("BUDGET", None, stats)
        if model is None:
            continue
        last_err = None
        for attempt in range(4):
            scaled = dict(model)
            if attempt:
                for key in scaled:
                    if key.startswith("x[") or key.startswith("e"):
                        scaled[key] *= 2 ** attempt
            try:
                witness = concretize(net, reach, a, fsa, scaled)
            except AssertionError as exc:
                last_err = str(exc)
                continue
            status, detail = replay(net, witness)
            if status == "valid":
                return Verdict("NONEMPTY", witness, stats)
            last_err = str(detail)
        raise AssertionError(
            f"could not concretize a feasible cycle at {a}: {last_err}")
    return Verdict("EMPTY", None, stats)
