"""Ground-truth semantics: the concrete transition system for k contributors.

Configurations count contributors per local state instead of tracking them by
identity (contributors are anonymous, so the counting abstraction is exact).
Witness steps still carry actor indices; these are assigned greedily when a
population-level path is turned into a witness, and checked again on replay.

For pushdown machines the state space is infinite, so checks involving a PDM
take a stack bound and are semi-decisions: EMPTY means empty within the bound.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .machines import (
    BudgetExceeded, Fsm, Pdm, PdmRule, Transition, UNINIT, READ, WRITE,
    LEADER, CONTRIBUTOR,
)

DEFAULT_BUDGET = 5_000_000


def state_budget():
    try:
        return int(os.environ.get("PARAMCK_BUDGET", ""))
    except ValueError:
        return DEFAULT_BUDGET


@dataclass(frozen=True)
class ConcreteConfig:
    leader_state: object
    leader_stack: tuple    # top first; () when the leader is an FSM
    store: str             # a value of G, or the uninitialized marker
    population: tuple      # sorted ((local, count), ...); local is a state, or
                           # (state, stack) for a PDM contributor


@dataclass(frozen=True)
class Witness:
    """A replayable lasso: stem then cycle, both lists of (actor, tid).

    Actor 0 is the leader, actors 1..k are contributors.  For PDM leaders the
    pivot (state, stack symbol) anchors the cycle: the cycle starts with the
    pivot symbol on top and never pops below it.
    """

    k: int
    stem: tuple
    cycle: tuple
    pivot: tuple | None = None


@dataclass(frozen=True)
class Verdict:
    kind: str              # "NONEMPTY", "EMPTY" or "BUDGET"
    witness: Witness | None = None
    stats: dict = field(default_factory=dict, compare=False)


def _pop_of(items):
    return tuple(sorted(items, key=repr))


def _pop_counts(population):
    return dict(population)


def _pop_move(population, src_local, dst_local):
    counts = dict(population)
    counts[src_local] -= 1
    if counts[src_local] == 0:
        del counts[src_local]
    counts[dst_local] = counts.get(dst_local, 0) + 1
    return _pop_of(counts.items())


def contributor_initial_local(net):
    c = net.contributor
    if isinstance(c, Pdm):
        return (c.initial, (c.bottom,))
    return c.initial


def initial_config(net, k):
    """Initial configuration: leader at its initial state (stack = bottom for
    a PDM leader), uninitialized store, k contributors at their initial state."""
    if k < 1:
        raise ValueError("need at least one contributor")
    stack = (net.leader.bottom,) if isinstance(net.leader, Pdm) else ()
    pop = _pop_of([(contributor_initial_local(net), k)])
    return ConcreteConfig(net.leader.initial, stack, UNINIT, pop)


def _leader_moves(net, c, stack_bound):
    moves = []
    if isinstance(net.leader, Pdm):
        for t in net.leader_transitions:
            rule = t.payload
            if rule.src != c.leader_state or not c.leader_stack:
                continue
            if rule.top != c.leader_stack[0]:
                continue
            act = rule.action
            if act.kind == READ and c.store != act.value:
                continue
            store = act.value if act.kind == WRITE else c.store
            if rule.effect[0] == "push":
                stack = (rule.effect[1],) + c.leader_stack
                if stack_bound is not None and len(stack) > stack_bound:
                    continue
            else:
                stack = c.leader_stack[1:]
                if not stack:
                    continue   # popping the last symbol leaves a dead machine
            moves.append((t, ConcreteConfig(rule.dst, stack, store, c.population)))
    else:
        for t in net.leader_transitions:
            src, act, dst = t.payload
            if src != c.leader_state:
                continue
            if act.kind == READ and c.store != act.value:
                continue
            store = act.value if act.kind == WRITE else c.store
            moves.append((t, ConcreteConfig(dst, (), store, c.population)))
    return moves


def contributor_local_moves(net, t, local, store, stack_bound=None):
    """Apply contributor transition t to one contributor in local state.

    Returns None if not applicable, else (new_local, new_store).
    """
    if isinstance(net.contributor, Pdm):
        rule = t.payload
        state, stack = local
        if rule.src != state or not stack or rule.top != stack[0]:
            return None
        act = rule.action
        if act.kind == READ and store != act.value:
            return None
        if rule.effect[0] == "push":
            new_stack = (rule.effect[1],) + stack
            if stack_bound is not None and len(new_stack) > stack_bound:
                return None
        else:
            new_stack = stack[1:]
            if not new_stack:
                return None
        new_store = act.value if act.kind == WRITE else store
        return ((rule.dst, new_stack), new_store)
    src, act, dst = t.payload
    if src != local:
        return None
    if act.kind == READ and store != act.value:
        return None
    new_store = act.value if act.kind == WRITE else store
    return (dst, new_store)


def successors(net, c, stack_bound=None):
    """All enabled transitions of the concrete system from configuration c."""
    moves = _leader_moves(net, c, stack_bound)
    for t in net.contributor_transitions:
        for local, count in c.population:
            res = contributor_local_moves(net, t, local, c.store, stack_bound)
            if res is None:
                continue
            new_local, new_store = res
            pop = _pop_move(c.population, local, new_local)
            moves.append((t, ConcreteConfig(c.leader_state, c.leader_stack,
                                            new_store, pop)))
    return moves


def _explore(net, k, stack_bound, budget):
    """BFS over the reachable configurations.

    Returns (order, edges, parent) where order is the discovery list, edges
    maps a config to its (transition, successor) list, and parent maps a
    config to its BFS tree edge.
    """
    init = initial_config(net, k)
    order = [init]
    seen = {init}
    edges = {}
    parent = {init: None}
    i = 0
    while i < len(order):
        c = order[i]
        i += 1
        succ = successors(net, c, stack_bound)
        edges[c] = succ
        for t, d in succ:
            if d not in seen:
                seen.add(d)
                parent[d] = (c, t)
                order.append(d)
                if len(order) > budget:
                    raise BudgetExceeded(f"more than {budget} configurations")
    return order, edges, parent


def _sccs(order, edges):
    """Iterative Tarjan; returns a map config -> scc id and per-scc node lists."""
    index = {}
    low = {}
    onstack = set()
    stack = []
    scc_of = {}
    sccs = []
    counter = [0]

    for root in order:
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, ei = work[-1]
            if ei == 0:
                index[v] = low[v] = counter[0]
                counter[0] += 1
                stack.append(v)
                onstack.add(v)
            advanced = False
            succ = edges[v]
            while ei < len(succ):
                w = succ[ei][1]
                ei += 1
                if w not in index:
                    work[-1] = (v, ei)
                    work.append((w, 0))
                    advanced = True
                    break
                if w in onstack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            if ei >= len(succ):
                work.pop()
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        onstack.discard(w)
                        scc_of[w] = len(sccs)
                        comp.append(w)
                        if w == v:
                            break
                    sccs.append(comp)
                if work:
                    u, _ = work[-1]
                    low[u] = min(low[u], low[v])
    return scc_of, sccs


def _cycle_through(a, edges, scc_of):
    """Shortest nonempty path a -> ... -> a staying inside a's SCC."""
    target = a
    frontier = []
    parent = {}
    for t, d in edges[a]:
        if scc_of.get(d) != scc_of[a]:
            continue
        if d == target:
            return [(a, t, d)]
        if d not in parent:
            parent[d] = (a, t)
            frontier.append(d)
    i = 0
    while i < len(frontier):
        v = frontier[i]
        i += 1
        for t, d in edges[v]:
            if scc_of.get(d) != scc_of[a]:
                continue
            if d == target:
                steps = [(v, t, d)]
                cur = v
                while cur != a:
                    p, pt = parent[cur]
                    steps.append((p, pt, cur))
                    cur = p
                steps.reverse()
                return steps
            if d not in parent:
                parent[d] = (v, t)
                frontier.append(d)
    return None


def _assign_actors(net, k, steps):
    """Turn population-level steps (src_cfg, transition, dst_cfg) into
    (actor, tid) pairs with greedy lowest-index contributor assignment."""
    locals_ = [contributor_initial_local(net)] * k
    out = []
    for src_cfg, t, dst_cfg in steps:
        if t.owner == LEADER:
            out.append((0, t.tid))
            continue
        before = _pop_counts(src_cfg.population)
        after = _pop_counts(dst_cfg.population)
        moved_from = moved_to = None
        for local, n in before.items():
            if after.get(local, 0) < n:
                moved_from = local
        for local, n in after.items():
            if before.get(local, 0) < n:
                moved_to = local
        if moved_from is None:
            # self-loop: population unchanged; any contributor whose local
            # state maps to itself under t works
            for local, _ in src_cfg.population:
                res = contributor_local_moves(net, t, local, src_cfg.store)
                if res is not None and res[0] == local:
                    moved_from = moved_to = local
                    break
        idx = next(i for i, l in enumerate(locals_) if l == moved_from)
        locals_[idx] = moved_to
        out.append((idx + 1, t.tid))
    return tuple(out)


def check_explicit(net, k, stack_bound=None, budget=None):
    """Buchi emptiness of the concrete system with k contributors.

    NONEMPTY iff a reachable accepting configuration lies on a cycle; the
    returned witness replays step by step.  With a PDM anywhere, stack_bound
    is required and EMPTY only means empty within the bound.
    """
    if (isinstance(net.leader, Pdm) or isinstance(net.contributor, Pdm)) \
            and stack_bound is None:
        raise ValueError("stack_bound required for pushdown machines")
    if budget is None:
        budget = state_budget()
    try:
        order, edges, parent = _explore(net, k, stack_bound, budget)
    except BudgetExceeded as e:
        return Verdict("BUDGET", stats={"reason": str(e)})
    scc_of, sccs = _sccs(order, edges)
    accepting = net.leader.accepting
    nontrivial = set()
    for i, comp in enumerate(sccs):
        if len(comp) > 1:
            nontrivial.add(i)
    for c in order:
        if any(d == c for _, d in edges[c]):
            nontrivial.add(scc_of[c])

    stats = {"configurations": len(order)}
    for a in order:
        if a.leader_state not in accepting or scc_of[a] not in nontrivial:
            continue
        cycle_steps = _cycle_through(a, edges, scc_of)
        if cycle_steps is None:
            continue
        stem_steps = []
        cur = a
        while parent[cur] is not None:
            p, t = parent[cur]
            stem_steps.append((p, t, cur))
            cur = p
        stem_steps.reverse()
        all_steps = _assign_actors(net, k, stem_steps + cycle_steps)
        stem = all_steps[:len(stem_steps)]
        cycle = all_steps[len(stem_steps):]
        pivot = None
        if isinstance(net.leader, Pdm):
            pivot = (a.leader_state, a.leader_stack[0])
        w = Witness(k, stem, cycle, pivot)
        return Verdict("NONEMPTY", w, stats)
    return Verdict("EMPTY", stats=stats)


class _ReplayState:
    def __init__(self, net, k):
        self.net = net
        self.leader_state = net.leader.initial
        self.leader_stack = (net.leader.bottom,) if isinstance(net.leader, Pdm) else ()
        self.store = UNINIT
        self.locals = [contributor_initial_local(net)] * k

    def apply(self, actor, tid):
        """Apply one step; returns None on success, else a failure reason."""
        net = self.net
        try:
            t = net.transition(tid)
        except KeyError:
            return f"unknown transition {tid}"
        if actor == 0:
            if t.owner != LEADER:
                return f"{tid} is not a leader transition"
            if isinstance(net.leader, Pdm):
                rule = t.payload
                if rule.src != self.leader_state:
                    return f"leader is at {self.leader_state!r}, not {rule.src!r}"
                if not self.leader_stack or rule.top != self.leader_stack[0]:
                    return f"leader stack top is not {rule.top!r}"
                if rule.action.kind == READ and self.store != rule.action.value:
                    return f"store holds {self.store!r}, read needs {rule.action.value!r}"
                if rule.effect[0] == "push":
                    self.leader_stack = (rule.effect[1],) + self.leader_stack
                else:
                    if len(self.leader_stack) == 1:
                        return "pop would empty the leader stack"
                    self.leader_stack = self.leader_stack[1:]
                if rule.action.kind == WRITE:
                    self.store = rule.action.value
                self.leader_state = rule.dst
            else:
                src, act, dst = t.payload
                if src != self.leader_state:
                    return f"leader is at {self.leader_state!r}, not {src!r}"
                if act.kind == READ and self.store != act.value:
                    return f"store holds {self.store!r}, read needs {act.value!r}"
                if act.kind == WRITE:
                    self.store = act.value
                self.leader_state = dst
            return None
        if t.owner != CONTRIBUTOR:
            return f"{tid} is not a contributor transition"
        if not 1 <= actor <= len(self.locals):
            return f"actor index {actor} out of range"
        res = contributor_local_moves(net, t, self.locals[actor - 1], self.store)
        if res is None:
            return f"contributor {actor} cannot take {tid}"
        self.locals[actor - 1], self.store = res
        return None

    def config(self):
        from collections import Counter
        return ConcreteConfig(self.leader_state, self.leader_stack, self.store,
                              _pop_of(Counter(self.locals).items()))


def replay(net, w):
    """Validate a witness against the concrete semantics.

    Returns ("valid", None) or ("invalid", (step_index, reason)).  Step
    indices count through stem then cycle.
    """
    if w.k < 1:
        return ("invalid", (0, "witness needs at least one contributor"))
    if not w.cycle:
        return ("invalid", (0, "empty cycle"))
    st = _ReplayState(net, w.k)
    idx = 0
    for actor, tid in w.stem:
        err = st.apply(actor, tid)
        if err is not None:
            return ("invalid", (idx, err))
        idx += 1

    start = st.config()
    is_pdm_leader = isinstance(net.leader, Pdm)
    if is_pdm_leader:
        if w.pivot is None:
            return ("invalid", (idx, "PDM-leader witness needs a pivot"))
        pstate, psym = w.pivot
        if start.leader_state != pstate or start.leader_stack[0] != psym:
            return ("invalid", (idx, "cycle does not start at the pivot"))
    floor = len(start.leader_stack)
    accepting_seen = start.leader_state in net.leader.accepting
    for actor, tid in w.cycle:
        err = st.apply(actor, tid)
        if err is not None:
            return ("invalid", (idx, err))
        if is_pdm_leader and len(st.leader_stack) < floor:
            return ("invalid", (idx, "cycle pops below the pivot symbol"))
        if st.leader_state in net.leader.accepting:
            accepting_seen = True
        idx += 1
    end = st.config()
    if not accepting_seen:
        return ("invalid", (idx, "cycle visits no accepting state"))
    if is_pdm_leader:
        if end.leader_state != w.pivot[0]:
            return ("invalid", (idx, "cycle does not return to the pivot state"))
        if end.leader_stack[0] != w.pivot[1]:
            return ("invalid", (idx, "pivot symbol not on top after the cycle"))
        if end.store != start.store or end.population != start.population:
            return ("invalid", (idx, "store or population differs after the cycle"))
    else:
        if end != start:
            return ("invalid", (idx, "cycle does not return to the same configuration"))
    return ("valid", None)


def monotone_check(net, k, stack_bound=None):
    """NONEMPTY at k must imply NONEMPTY at k+1 (one extra contributor can
    simply stay put).  Returns ("holds", None) or ("counterexample", info)."""
    if isinstance(net.leader, Pdm) and stack_bound is None:
        raise ValueError("monotone_check needs an FSM leader or a stack bound")
    at_k = check_explicit(net, k, stack_bound)
    if at_k.kind != "NONEMPTY":
        return ("holds", None)
    at_k1 = check_explicit(net, k + 1, stack_bound)
    if at_k1.kind == "NONEMPTY":
        return ("holds", None)
    return ("counterexample", {"k": k, "at_k": at_k.kind, "at_k+1": at_k1.kind})
