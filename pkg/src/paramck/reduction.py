"""Pushdown contributors: effective stack height, the k-restriction FSM,
run-distribution utilities, and the PDM/PDM checker.

A pushdown contributor can be replaced by a finite-state machine that keeps
only a bounded window of the stack: every omega-word the contributor can
produce, it can also produce with a run whose "effective stack height" stays
below a bound N depending only on the machine's size.  The k-restriction
simulates exactly the effectively k-bounded runs, so the PDM/PDM problem
reduces to the PDM/FSM one with the N-restricted contributor.

The distribution utilities (embedding validation and the flattening split)
are the run-surgery tools behind that bound; they are exposed for testing
rather than used by the checker itself.
"""

from __future__ import annotations

from dataclasses import dataclass

from .machines import (BudgetExceeded, Fsm, Pdm, PdmRule, CONTRIBUTOR,
                       make_network)
from .explicit import state_budget, Verdict


@dataclass(frozen=True)
class RunPrefix:
    """A finite run of a single PDM from its initial configuration, given as
    the sequence of applied rules; an optional lasso marker (stem length,
    cycle length) declares the infinite run stem . cycle^omega."""

    machine: Pdm
    rules: tuple
    lasso: tuple | None = None


def run_configs(run, rules=None):
    """Configurations (state, stack) visited by the rule sequence; stacks are
    top-first tuples.  Raises ValueError if some rule does not apply."""
    if rules is None:
        rules = run.rules
    state = run.machine.initial
    stack = (run.machine.bottom,)
    out = [(state, stack)]
    for i, rule in enumerate(rules):
        if rule.src != state:
            raise ValueError(f"rule {i} expects state {rule.src!r}, run is at {state!r}")
        if not stack or stack[0] != rule.top:
            raise ValueError(f"rule {i} expects top {rule.top!r}")
        if rule.effect[0] == "push":
            stack = (rule.effect[1],) + stack
        else:
            stack = stack[1:]
            if not stack:
                raise ValueError(f"rule {i} pops the bottom symbol")
        state = rule.dst
        out.append((state, stack))
    return out


def unrolled_rules(run, periods=None):
    """Rule sequence with the lasso cycle unrolled enough times for effective
    stack heights in the stem and first period to be exact."""
    if run.lasso is None:
        return run.rules
    stem_len, cycle_len = run.lasso
    if stem_len + cycle_len != len(run.rules) or cycle_len < 1:
        raise ValueError("lasso marker does not match the rule sequence")
    if periods is None:
        # the future height minimum stabilizes after at most one period per
        # unit of dip, and a period can dip at most its own length
        periods = cycle_len + 3
    stem = run.rules[:stem_len]
    cycle = run.rules[stem_len:]
    return stem + cycle * periods


def effective_stack_height(run, i):
    """Height of the active stack prefix at position i.

    The symbols that are dark (never exposed again) at position i are those
    strictly below the minimum stack height of the remaining run: the symbol
    at the minimum itself can still be read, everything under it cannot.
    Hence esh(i) = h(i) - min_{j >= i} h(j) + 1.  For a finite prefix the
    minimum ranges over the prefix; for a lasso, over the infinite unrolling.
    """
    rules = unrolled_rules(run)
    configs = run_configs(run, rules)
    if not 0 <= i < (len(run.rules) + 1 if run.lasso is None else len(configs)):
        raise ValueError(f"position {i} out of range")
    heights = [len(stack) for _, stack in configs]
    return heights[i] - min(heights[i:]) + 1


def run_word(run):
    return tuple(r.action for r in run.rules)


def restrict(pdm, k, budget=None):
    """The k-restriction: an FSM over states (q, window) where the window is
    the top min(k, height) stack symbols.

    A push slides the window (the symbol falling out is forgotten for good);
    a pop requires at least two symbols in the window, since a pop that would
    empty it means the run dipped more than k below an earlier height, which
    no effectively k-bounded run does.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if budget is None:
        budget = state_budget()
    initial = (pdm.initial, (pdm.bottom,))
    order = [initial]
    seen = {initial}
    transitions = []
    i = 0
    while i < len(order):
        state = order[i]
        i += 1
        q, window = state
        for rule in pdm.rules:
            if rule.src != q or rule.top != window[0]:
                continue
            if rule.effect[0] == "push":
                new_window = ((rule.effect[1],) + window)[:k]
            else:
                if len(window) < 2:
                    continue
                new_window = window[1:]
            target = (rule.dst, new_window)
            transitions.append((state, rule.action, target))
            if target not in seen:
                seen.add(target)
                order.append(target)
                if len(order) > budget:
                    raise BudgetExceeded(
                        f"{k}-restriction exceeds {budget} states")
    return Fsm(frozenset(order), initial, tuple(transitions), None)


def _kbounded_words(pdm, k, L):
    """Words of length <= L labeled by run prefixes whose positions all have
    effective stack height <= k within the prefix.

    DFS over run prefixes; the stack is capped at k + L symbols, which no
    run of <= L steps can exceed anyway.  A prefix is k-bounded iff no height
    exceeds the minimum height of the remaining suffix by k or more, which we
    check against the best (highest) future minimum: extending a run never
    lowers a position's esh below its in-prefix value, so the in-prefix esh
    is the right notion for "some k-bounded continuation exists locally".
    """
    words = set()

    def heights_ok(heights):
        run_min = heights[-1]
        for h in reversed(heights):
            run_min = min(run_min, h)
            if h - run_min + 1 > k:
                return False
        return True

    def dfs(state, stack, word, heights):
        if heights_ok(heights):
            words.add(tuple(word))
        if len(word) == L:
            return
        for rule in pdm.rules:
            if rule.src != state or not stack or rule.top != stack[0]:
                continue
            if rule.effect[0] == "push":
                new_stack = (rule.effect[1],) + stack
                if len(new_stack) > k + L:
                    continue
            else:
                new_stack = stack[1:]
                if not new_stack:
                    continue
            word.append(rule.action)
            heights.append(len(new_stack))
            dfs(rule.dst, new_stack, word, heights)
            word.pop()
            heights.pop()

    dfs(pdm.initial, (pdm.bottom,), [], [1])
    return words


def _fsm_words(fsm, L):
    words = set()

    def dfs(state, word):
        words.add(tuple(word))
        if len(word) == L:
            return
        for src, act, dst in fsm.transitions:
            if src == state:
                word.append(act)
                dfs(dst, word)
                word.pop()

    dfs(fsm.initial, [])
    return words


def kbounded_agreement(pdm, k, L):
    """Desk-scale equivalence check: a word of length <= L admits an
    effectively k-bounded run prefix iff it labels a path of the
    k-restriction.  Returns ("holds", None) or ("counterexample", word)."""
    bounded = _kbounded_words(pdm, k, L)
    via_fsm = _fsm_words(restrict(pdm, k), L)
    for w in sorted(bounded ^ via_fsm, key=lambda w: (len(w), repr(w))):
        return ("counterexample", w)
    return ("holds", None)


def compute_N(contributor):
    """Window bound sufficient for replacing a pushdown contributor by its
    restriction: 2 |Q|^2 |Gamma| + 1."""
    return 2 * len(contributor.states) ** 2 * len(contributor.stack_alphabet) + 1


def restrict_network(net):
    """The network with its PDM contributor replaced by the N-restriction.

    Transition ids are re-assigned from the restricted machine, so witnesses
    for the returned network speak about window states, not stacks.
    """
    if not isinstance(net.contributor, Pdm):
        raise ValueError("contributor is not a PDM")
    n = compute_N(net.contributor)
    try:
        restricted = restrict(net.contributor, n)
    except BudgetExceeded as e:
        raise BudgetExceeded(f"{e} (window bound N = {n})") from None
    return make_network(net.values, net.leader, restricted), n


def check_pdm_pdm(net, node_budget=500_000):
    """Decide the PDM leader / PDM contributor problem by restricting the
    contributor to its N-bounded window FSM and deferring to the PDM/FSM
    checker.  The witness replays against the restricted network."""
    from .pushdown import check_pdm_fsm
    if not isinstance(net.leader, Pdm) or not isinstance(net.contributor, Pdm):
        raise ValueError("check_pdm_pdm needs a PDM leader and a PDM contributor")
    try:
        restricted_net, n = restrict_network(net)
    except BudgetExceeded:
        return Verdict("BUDGET", None, {"reason": "restriction too large"})
    verdict = check_pdm_fsm(restricted_net, node_budget=node_budget)
    verdict.stats["window_bound"] = n
    return verdict


# ---------------------------------------------------------------------------
# run distributions

@dataclass(frozen=True)
class Distribution:
    """A multiset of child runs covering a parent run.

    embeddings[c] maps child c's step i (1-based, as index i-1) to the parent
    step it replays; together the children must cover every parent step, each
    child must replay its steps in order, and a child step must apply the very
    rule the parent applied there.
    """

    parent: RunPrefix
    children: tuple
    embeddings: tuple      # per child, a tuple of parent positions (1-based)


def validate_distribution(d):
    """("valid", None), or ("invalid", reason)."""
    try:
        run_configs(d.parent)
    except ValueError as e:
        return ("invalid", f"parent is not a legal run: {e}")
    if len(d.children) != len(d.embeddings):
        return ("invalid", "one embedding per child required")
    covered = set()
    for ci, (child, psi) in enumerate(zip(d.children, d.embeddings)):
        if child.machine is not d.parent.machine \
                and child.machine != d.parent.machine:
            return ("invalid", f"child {ci} runs on a different machine")
        try:
            run_configs(child)
        except ValueError as e:
            return ("invalid", f"child {ci} is not a legal run: {e}")
        if len(psi) != len(child.rules):
            return ("invalid", f"child {ci}: embedding arity mismatch")
        prev = 0
        for i, pos in enumerate(psi):
            if not 1 <= pos <= len(d.parent.rules):
                return ("invalid", f"child {ci}: position {pos} out of range")
            if pos <= prev:
                return ("invalid", f"child {ci}: embedding not strictly increasing")
            prev = pos
            if child.rules[i] != d.parent.rules[pos - 1]:
                return ("invalid",
                        f"child {ci}: rule at step {i + 1} differs from parent"
                        f" step {pos}")
            covered.add(pos)
    missing = set(range(1, len(d.parent.rules) + 1)) - covered
    if missing:
        return ("invalid", f"parent steps not covered: {sorted(missing)}")
    return ("valid", None)


def last_position(psi, i):
    """Largest child step whose parent position is <= i; 0 if none."""
    last = 0
    for k, pos in enumerate(psi, start=1):
        if pos <= i:
            last = k
    return last


def child_config_at(child, psi, i):
    """Configuration of the child after replaying all its steps that embed at
    or before parent position i."""
    return run_configs(child)[last_position(psi, i)]


def is_zk_bounded(d, Z, K):
    """Every child stays effectively K-bounded while the parent runs its
    first Z steps."""
    for child, psi in zip(d.children, d.embeddings):
        for i in range(Z + 1):
            if effective_stack_height(child, last_position(psi, i)) > K:
                return False
    return True


def is_synchronized(d):
    """At every parent position of effective stack height 1, every child has
    caught up to the identical configuration, also at height 1."""
    parent_cfgs = run_configs(d.parent)
    for i in range(len(d.parent.rules) + 1):
        if effective_stack_height(d.parent, i) != 1:
            continue
        for child, psi in zip(d.children, d.embeddings):
            last = last_position(psi, i)
            if run_configs(child)[last] != parent_cfgs[i]:
                return False
            if effective_stack_height(child, last) != 1:
                return False
    return True


def flatten_run(run, Z):
    """Split a run at its first position Z of effective stack height N+1 into
    two children, each effectively N-bounded up to (the image of) Z.

    The stack at Z has N+1 active symbols; each active symbol except the
    bottommost one has a well-defined push position before Z and pop position
    after Z (the remaining run dips exactly to the bottom of the active
    prefix, so every strictly higher symbol is popped).  Among the N
    (state-at-push, symbol, state-at-pop) triples, three must coincide, and
    cutting the matched push/pop segments pairwise yields two legal runs that
    cover the parent between them.
    """
    n = compute_N(run.machine)
    configs = run_configs(run)
    heights = [len(s) for _, s in configs]
    if not 0 <= Z < len(configs):
        raise ValueError("Z out of range")
    esh_z = effective_stack_height(run, Z)
    if esh_z != n + 1:
        raise ValueError(
            f"position {Z} has effective stack height {esh_z}, expected {n + 1}")
    for i in range(Z):
        if effective_stack_height(run, i) > n:
            raise ValueError(f"position {i} already exceeds the bound")

    m = min(heights[Z:])
    stack_z = configs[Z][1]
    # index i = 1..N picks the active symbol at absolute height m + i
    # (skipping the bottommost active symbol at height m); top-first stacks
    def symbol(i):
        return stack_z[heights[Z] - m - i]

    pushes = {}
    pops = {}
    for i in range(1, n + 1):
        h = m + i
        pushes[i] = max(j for j in range(Z + 1) if heights[j] == h)
        after = [j for j in range(Z, len(configs)) if heights[j] == h - 1]
        if not after:
            raise ValueError(f"active symbol {i} is never popped in the run")
        pops[i] = min(after)

    triples = {i: (configs[pushes[i]][0], symbol(i), configs[pops[i]][0])
               for i in range(1, n + 1)}
    found = None
    for j1 in range(1, n + 1):
        for j2 in range(j1 + 1, n + 1):
            if triples[j1] != triples[j2]:
                continue
            for j3 in range(j2 + 1, n + 1):
                if triples[j1] == triples[j3]:
                    found = (j1, j2, j3)
                    break
            if found:
                break
        if found:
            break
    if found is None:
        raise AssertionError("pigeonhole triple missing; bound miscomputed")
    j1, j2, j3 = found

    def child(del_push, del_pop):
        lo1, hi1 = pushes[del_push[0]] + 1, pushes[del_push[1]]
        lo2, hi2 = pops[del_pop[0]] + 1, pops[del_pop[1]]
        keep = [p for p in range(1, len(run.rules) + 1)
                if not (lo1 <= p <= hi1 or lo2 <= p <= hi2)]
        rules = tuple(run.rules[p - 1] for p in keep)
        return RunPrefix(run.machine, rules), tuple(keep)

    # the pop of symbol j2 happens after the pop of j3 and before that of j1
    child_a, keep_a = child((j1, j2), (j2, j1))
    child_b, keep_b = child((j2, j3), (j3, j2))
    return Distribution(run, (child_a, child_b), (keep_a, keep_b))
