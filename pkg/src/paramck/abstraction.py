"""Abstraction of the concrete system for FSM contributors.

An abstract configuration keeps the leader state and store value but replaces
the population by the set Q of contributor states that hold at least one
token.  The map alpha (populated states) and gamma (populations supported on
Q) form a Galois insertion, the abstraction simulates every concrete path,
and Q only ever grows along abstract paths.
"""

from __future__ import annotations

from dataclasses import dataclass

from .machines import BudgetExceeded, Fsm, Pdm, UNINIT, READ, WRITE, LEADER
from .explicit import state_budget


@dataclass(frozen=True)
class AbstractConfig:
    leader_state: object
    store: str
    Q: frozenset           # populated contributor states, never empty


def alpha(populations):
    """Set of contributor states populated by at least one member."""
    out = set()
    for pop in populations:
        for state, count in pop:
            if count >= 1:
                out.add(state)
    return frozenset(out)


def gamma(Q):
    """Predicate over populations: no tokens outside Q."""
    Q = frozenset(Q)

    def admits(population):
        return all(state in Q for state, count in population if count >= 1)

    return admits


def delta(t):
    """Net population change of one firing of t, as a state -> int map.

    Leader moves never touch the population; a contributor move transfers one
    token from source to target.
    """
    if t.owner == LEADER:
        return {}
    src, _, dst = t.payload
    if src == dst:
        return {}
    return {src: -1, dst: +1}


def contributor_abstract_moves(net, store, Q):
    """Abstract contributor steps from (store, Q): enabled transitions with a
    populated source, yielding the updated store and the grown Q."""
    moves = []
    for t in net.contributor_transitions:
        src, act, dst = t.payload
        if src not in Q:
            continue
        if act.kind == READ and store != act.value:
            continue
        new_store = act.value if act.kind == WRITE else store
        moves.append((t, new_store, Q | {dst}))
    return moves


def abstract_successors(net, a):
    """Successors in the abstract system (FSM leader and contributor)."""
    if not isinstance(net.leader, Fsm) or not isinstance(net.contributor, Fsm):
        raise ValueError("abstract_successors needs FSM leader and contributor")
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
        moves.append((t, AbstractConfig(a.leader_state, store, Q)))
    return moves


@dataclass(frozen=True)
class AbstractReach:
    order: tuple           # discovery order
    edges: dict            # config -> tuple of (Transition, successor)
    parent: dict           # config -> (predecessor, Transition) or None


def initial_abstract(net):
    return AbstractConfig(net.leader.initial, UNINIT,
                          frozenset([net.contributor.initial]))


def reachable_abstract(net, budget=None):
    """Deterministic BFS saturation of the abstract system.

    One predecessor edge per configuration (first discovered) is kept for stem
    extraction; any stem works because every abstract path can be covered by a
    sufficiently large concrete population.
    """
    if budget is None:
        budget = state_budget()
    init = initial_abstract(net)
    order = [init]
    seen = {init}
    edges = {}
    parent = {init: None}
    i = 0
    while i < len(order):
        a = order[i]
        i += 1
        succ = abstract_successors(net, a)
        edges[a] = tuple(succ)
        for t, b in succ:
            if b not in seen:
                seen.add(b)
                parent[b] = (a, t)
                order.append(b)
                if len(order) > budget:
                    raise BudgetExceeded(
                        f"more than {budget} abstract configurations")
    return AbstractReach(tuple(order), edges, parent)


def abstract_stem(reach, a):
    """Path (list of (config, Transition, config)) from the initial abstract
    configuration to a, following the stored predecessor links."""
    steps = []
    cur = a
    while reach.parent[cur] is not None:
        p, t = reach.parent[cur]
        steps.append((p, t, cur))
        cur = p
    steps.reverse()
    return steps
