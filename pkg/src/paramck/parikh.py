"""Parikh images of finite automata and context-free grammars, and a
feasibility solver for the resulting natural-number linear systems.

The encodings follow the classic flow construction: one multiplicity variable
per edge (or production), flow balance per state (or nonterminal), and a
connectivity side condition forcing the used part of the graph to be
reachable from the start.  Connectivity is a first-class atom interpreted
semantically by the solver rather than being expanded into disjunctions, so a
system is a boolean combination of integer-linear and connectivity atoms over
named natural variables.

The solver finds integer models of the conjunctive part (HiGHS first, with
exact model verification, falling back to bounds propagation plus branch and
bound pruned by an exact rational simplex), treats explicit disjunctions
lazily, and enforces connectivity by checking the model's support graph and
adding a valid cut when it is disconnected.  Verdicts are exact; if the
search exceeds its node budget it raises instead of guessing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from .machines import BudgetExceeded

TRUE = ("true",)
FALSE = ("false",)


def le(coeffs, const):
    return ("le", dict(coeffs), const)


def ge(coeffs, const):
    return ("le", {v: -c for v, c in coeffs.items()}, -const)


def eq(coeffs, const):
    return ("eq", dict(coeffs), const)


def land(parts):
    return ("and", list(parts))


def lor(parts):
    return ("or", list(parts))


def connected(root, edges):
    """Connectivity atom: in the graph whose edge (src, dst) is present when
    its variable is positive, every node incident to a present edge must be
    reachable from root along present edges."""
    return ("conn", root, tuple(edges))


@dataclass(frozen=True)
class LinearSystem:
    """Existential natural-number variables under a boolean combination of
    integer-linear constraints."""

    variables: tuple       # declaration order; also the branching order
    constraint: tuple

    def conjoin(self, atoms):
        return LinearSystem(self.variables,
                            land([self.constraint] + list(atoms)))


@dataclass(frozen=True)
class Fsa:
    """Finite automaton over an arbitrary label alphabet with one designated
    initial and one designated final state."""

    states: tuple
    edges: tuple           # of (src, label, dst)
    initial: object
    final: object


@dataclass(frozen=True)
class Grammar:
    nonterminals: tuple
    terminals: tuple
    start: object
    productions: tuple     # of (lhs, rhs-tuple)


def letter_var(label):
    return f"x[{label}]"


def parikh_fsa(fsa, alphabet=None):
    """Linear system whose solutions, projected to the letter variables
    x[label], are exactly the Parikh vectors of the automaton's language.

    Variables: e{i} per edge (multiplicity) and x[label] per label, tied by a
    flow-balance system plus the connectivity side condition.  Letters of the
    alphabet without any edge are constrained to zero; by default the
    alphabet is the set of labels appearing on edges.
    """
    states = list(fsa.states)
    labels = list(alphabet) if alphabet is not None else []
    for _, lab, _ in fsa.edges:
        if lab not in labels:
            labels.append(lab)

    evars = [f"e{i}" for i in range(len(fsa.edges))]
    xvars = [letter_var(lab) for lab in labels]
    variables = tuple(xvars + evars)

    atoms = []

    # flow balance: in - out = [final] - [initial]
    for s in states:
        coeffs = {}
        for i, (src, _, dst) in enumerate(fsa.edges):
            if dst == s:
                coeffs[f"e{i}"] = coeffs.get(f"e{i}", 0) + 1
            if src == s:
                coeffs[f"e{i}"] = coeffs.get(f"e{i}", 0) - 1
        rhs = (1 if s == fsa.final else 0) - (1 if s == fsa.initial else 0)
        atoms.append(eq(coeffs, rhs))

    # letters count edge uses
    for lab in labels:
        coeffs = {letter_var(lab): 1}
        for i, (_, elab, _) in enumerate(fsa.edges):
            if elab == lab:
                coeffs[f"e{i}"] = coeffs.get(f"e{i}", 0) - 1
        atoms.append(eq(coeffs, 0))

    # every used edge must be reachable from the initial state
    atoms.append(connected(fsa.initial,
                           [(f"e{i}", src, dst)
                            for i, (src, _, dst) in enumerate(fsa.edges)]))
    return LinearSystem(variables, land(atoms))


def reduce_grammar(g):
    """Remove unproductive and unreachable symbols; may leave no productions."""
    productive = set()
    changed = True
    while changed:
        changed = False
        for lhs, rhs in g.productions:
            if lhs in productive:
                continue
            if all(sym in productive or sym in g.terminals for sym in rhs):
                productive.add(lhs)
                changed = True
    prods = [(lhs, rhs) for lhs, rhs in g.productions
             if lhs in productive
             and all(s in productive or s in g.terminals for s in rhs)]
    reachable = {g.start}
    changed = True
    while changed:
        changed = False
        for lhs, rhs in prods:
            if lhs in reachable:
                for sym in rhs:
                    if sym not in g.terminals and sym not in reachable:
                        reachable.add(sym)
                        changed = True
    prods = tuple((lhs, rhs) for lhs, rhs in prods if lhs in reachable)
    nts = tuple(nt for nt in g.nonterminals if nt in reachable and nt in productive)
    return Grammar(nts, g.terminals, g.start, prods)


def parikh_cfg(g):
    """Linear system for the Parikh image of a context-free grammar.

    Variables: y{i} per production and x[t] per terminal.  Balance: each
    nonterminal is produced as often as it is expanded (the start symbol once
    more); connectivity mirrors the automaton case over the derivation
    forest.
    """
    g = reduce_grammar(g)
    if g.start not in g.nonterminals:
        return LinearSystem((), FALSE)

    yvars = [f"y{i}" for i in range(len(g.productions))]
    xvars = [letter_var(t) for t in g.terminals]
    variables = tuple(xvars + yvars)
    atoms = []

    for nt in g.nonterminals:
        coeffs = {}
        for i, (lhs, rhs) in enumerate(g.productions):
            c = (1 if lhs == nt else 0) - sum(1 for s in rhs if s == nt)
            if c:
                coeffs[f"y{i}"] = c
        atoms.append(eq(coeffs, 1 if nt == g.start else 0))

    for t in g.terminals:
        coeffs = {letter_var(t): 1}
        for i, (_, rhs) in enumerate(g.productions):
            c = sum(1 for s in rhs if s == t)
            if c:
                coeffs[f"y{i}"] = -c
        atoms.append(eq(coeffs, 0))

    # every used nonterminal must be reachable from the start in the
    # derivation forest
    conn_edges = []
    for i, (lhs, rhs) in enumerate(g.productions):
        # the self edge marks lhs as used even when rhs is all terminals
        conn_edges.append((f"y{i}", lhs, lhs))
        for nt in dict.fromkeys(s for s in rhs if s not in g.terminals):
            conn_edges.append((f"y{i}", lhs, nt))
    atoms.append(connected(g.start, conn_edges))
    return LinearSystem(variables, land(atoms))


# ---------------------------------------------------------------------------
# solver

def _farkas_infeasible(rows):
    """Try to certify infeasibility of {Ax <= b, x >= 0} exactly.

    Solves min b'y subject to A'y >= 0, 0 <= y <= 1 in floats; a negative
    optimum suggests a Farkas certificate, which is rationalized and then
    verified in exact arithmetic.  Returns True only on a verified
    certificate, so a True answer is trustworthy; False just means no
    certificate was found this way.
    """
    m = len(rows)
    n = len(rows[0][0])
    a = numpy.array([coeffs for coeffs, _ in rows], dtype=float)
    b = numpy.array([const for _, const in rows], dtype=float)
    res = linprog(c=b, A_ub=-a.T, b_ub=numpy.zeros(n), bounds=(0, 1),
                  method="highs")
    if res.status != 0 or res.x is None or res.fun > -1e-9:
        return False
    for denom in (1, 16, 1024, 10 ** 6):
        y = [Fraction(v).limit_denominator(denom) for v in res.x]
        if any(yi < 0 for yi in y):
            continue
        combo = [sum(y[i] * rows[i][0][j] for i in range(m)) for j in range(n)]
        rhs = sum(y[i] * rows[i][1] for i in range(m))
        if all(c >= 0 for c in combo) and rhs < 0:
            return True
    return False


def _lp_feasible(rows):
    """Feasibility of {Ax <= b, x >= 0} over the rationals, exactly.

    rows: list of (coeff-list, const).  A float LP answers first: a feasible
    answer is accepted as-is (wrongly accepting feasibility only costs
    pruning, never correctness), an infeasible answer must be backed by an
    exact Farkas certificate or confirmed by the exact simplex fallback.
    """
    m = len(rows)
    if m == 0:
        return True
    n = len(rows[0][0])
    if all(const >= 0 for _, const in rows):
        return True
    a = numpy.array([coeffs for coeffs, _ in rows], dtype=float)
    b = numpy.array([const for _, const in rows], dtype=float)
    res = linprog(c=numpy.zeros(n), A_ub=a, b_ub=b, bounds=(0, None),
                  method="highs")
    if res.status == 0:
        return True
    if res.status == 2 and _farkas_infeasible(rows):
        return False
    return _lp_feasible_exact(rows)


def _lp_feasible_exact(rows):
    """Exact feasibility of {Ax <= b, x >= 0}: phase-1 simplex with Bland's
    rule on a dense Fraction tableau."""
    m = len(rows)
    n = len(rows[0][0])
    # columns: 0..n-1 structural, n the phase-1 variable x0, n+1..n+m slacks,
    # last the right-hand side
    zero, one = Fraction(0), Fraction(1)
    tab = []
    for i, (coeffs, const) in enumerate(rows):
        row = [Fraction(c) for c in coeffs] + [Fraction(-1)] + [zero] * m
        row[n + 1 + i] = one
        row.append(Fraction(const))
        tab.append(row)
    basis = [n + 1 + i for i in range(m)]
    # make the basis feasible: pivot x0 in at the most negative row
    piv = min(range(m), key=lambda i: (tab[i][-1], i))
    _pivot(tab, basis, piv, n)
    # minimize x0; only x0 carries cost, so with x0 basic in row r the reduced
    # cost of column j is [j == n] - tab[r][j]
    while True:
        r = None
        for i in range(m):
            if basis[i] == n:
                r = i
        if r is None:
            return True            # x0 left the basis: optimum is 0
        entering = None
        for j in range(n + 1 + m):
            red = (one if j == n else zero) - tab[r][j]
            if red < 0:
                entering = j       # Bland: smallest improving index
                break
        if entering is None:
            return tab[r][-1] <= 0
        leaving = None
        best = None
        for i in range(m):
            if tab[i][entering] > 0:
                ratio = tab[i][-1] / tab[i][entering]
                if best is None or ratio < best or \
                        (ratio == best and basis[i] < basis[leaving]):
                    best = ratio
                    leaving = i
        if leaving is None:
            return True            # cost unbounded below, so it reaches 0
        _pivot(tab, basis, leaving, entering)


def _pivot(tab, basis, row, col):
    m = len(tab)
    pr = tab[row]
    pv = pr[col]
    tab[row] = [a / pv for a in pr]
    for i in range(m):
        if i != row and tab[i][col] != 0:
            f = tab[i][col]
            tab[i] = [a - f * b for a, b in zip(tab[i], tab[row])]
    basis[row] = col


def _value_cap(n_vars, atoms):
    a = 2
    for _, coeffs, const in atoms:
        for c in coeffs.values():
            a = max(a, abs(c))
        a = max(a, abs(const))
    m = len(atoms)
    return (a * (m + n_vars + 2)) ** (2 * min(m + n_vars, 12) + 1)


class _Budget:
    def __init__(self, nodes):
        self.left = nodes

    def tick(self):
        self.left -= 1
        if self.left < 0:
            raise BudgetExceeded("solver node budget exhausted")


def _propagate(atoms, lb, ub):
    """Interval tightening to (bounded-round) fixpoint; False on conflict."""
    for _ in range(50):
        changed = False
        for kind, coeffs, const in atoms:
            forms = [(coeffs, const)]
            if kind == "eq":
                forms.append(({v: -c for v, c in coeffs.items()}, -const))
            for cs, b in forms:
                # sum cs*x <= b
                lo = 0
                unbounded = []
                for v, c in cs.items():
                    if c > 0:
                        lo += c * lb[v]
                    elif ub[v] is None:
                        unbounded.append(v)
                    else:
                        lo += c * ub[v]
                if not unbounded and lo > b:
                    return False
                for v, c in cs.items():
                    if c > 0:
                        if unbounded:
                            continue   # some other term has no lower bound
                        rest = lo - c * lb[v]
                        new_ub = (b - rest) // c
                        if new_ub < lb[v]:
                            return False
                        if ub[v] is None or new_ub < ub[v]:
                            ub[v] = new_ub
                            changed = True
                    elif c < 0:
                        if unbounded != [v] and unbounded:
                            continue
                        rest = lo if v in unbounded else lo - c * ub[v]
                        # c*x <= b - rest with c < 0 gives x >= (rest-b)/(-c)
                        new_lb = (rest - b + (-c) - 1) // (-c)
                        if new_lb > lb[v]:
                            if ub[v] is not None and new_lb > ub[v]:
                                return False
                            lb[v] = new_lb
                            changed = True
        if not changed:
            return True
    return True


def _check_all(atoms, model):
    for kind, coeffs, const in atoms:
        s = sum(c * model[v] for v, c in coeffs.items())
        if kind == "eq" and s != const:
            return False
        if kind == "le" and s > const:
            return False
    return True


def _milp_model(variables, atoms, lb, ub):
    """Ask HiGHS for an integer model.  A returned model is checked exactly by
    the caller; None only means HiGHS found nothing, never a trusted UNSAT."""
    n = len(variables)
    vi = {v: i for i, v in enumerate(variables)}
    rows = []
    lo = []
    hi = []
    for kind, coeffs, const in atoms:
        row = [0.0] * n
        for v, c in coeffs.items():
            row[vi[v]] = float(c)
        rows.append(row)
        hi.append(float(const))
        lo.append(float(const) if kind == "eq" else -numpy.inf)
    lower = [float(lb[v]) for v in variables]
    upper = [numpy.inf if ub[v] is None else float(ub[v]) for v in variables]
    try:
        res = milp(c=numpy.zeros(n),
                   constraints=LinearConstraint(numpy.array(rows),
                                                numpy.array(lo),
                                                numpy.array(hi)),
                   bounds=Bounds(numpy.array(lower), numpy.array(upper)),
                   integrality=numpy.ones(n))
    except ValueError:
        return None
    if res.status != 0 or res.x is None:
        return None
    return {v: int(round(res.x[vi[v]])) for v in variables}


def _solve_conjunction(variables, atoms, budget):
    for a in atoms:
        if a[0] == "false":
            return None
    atoms = [a for a in atoms if a[0] in ("le", "eq")]
    variables = list(variables)
    for _, coeffs, _ in atoms:
        for v in coeffs:
            if v not in variables:
                variables.append(v)   # mentioned but undeclared: fresh natural
    if not variables:
        return {} if _check_all(atoms, {}) else None
    lb = {v: 0 for v in variables}
    ub = {v: None for v in variables}
    cap = _value_cap(len(variables), atoms)

    budget.tick()
    first = {v: 0 for v in variables}
    if not _propagate(atoms, dict(lb), dict(ub)):
        return None
    if atoms:
        model = _milp_model(variables, atoms, lb, ub)
        if model is not None and _check_all(atoms, model):
            return model
        # fall through to the exact search: a missing HiGHS model is not a
        # trusted unsatisfiability verdict
    elif _check_all(atoms, first):
        return first

    def lp_ok(lb, ub):
        rows = []
        order = list(variables)
        vi = {v: i for i, v in enumerate(order)}
        for kind, coeffs, const in atoms:
            row = [0] * len(order)
            for v, c in coeffs.items():
                row[vi[v]] = c
            rows.append((row, const))
            if kind == "eq":
                rows.append(([-c for c in row], -const))
        for v in order:
            if lb[v] > 0:
                row = [0] * len(order)
                row[vi[v]] = -1
                rows.append((row, -lb[v]))
            if ub[v] is not None:
                row = [0] * len(order)
                row[vi[v]] = 1
                rows.append((row, ub[v]))
        return _lp_feasible(rows)

    def search(lb, ub):
        budget.tick()
        lb, ub = dict(lb), dict(ub)
        if not _propagate(atoms, lb, ub):
            return None
        free = [v for v in variables if ub[v] is None or lb[v] < ub[v]]
        if not free:
            model = {v: lb[v] for v in variables}
            return model if _check_all(atoms, model) else None
        if not lp_ok(lb, ub):
            return None
        v = free[0]
        hi = ub[v] if ub[v] is not None else cap
        val = lb[v]
        while val <= hi:
            budget.tick()
            lb2, ub2 = dict(lb), dict(ub)
            lb2[v] = ub2[v] = val
            res = search(lb2, ub2)
            if res is not None:
                return res
            # before trying the next value, ask propagation and the LP whether
            # any larger value can work at all
            lb2, ub2 = dict(lb), dict(ub)
            lb2[v] = val + 1
            if not _propagate(atoms, lb2, ub2):
                return None
            if not lp_ok(lb2, ub2):
                return None
            lb, ub = lb2, ub2
            val = max(val + 1, lb[v])
            hi = cap if ub[v] is None else ub[v]
        return None

    return search(lb, ub)


def _eval_node(node, model):
    kind = node[0]
    if kind == "true":
        return True
    if kind == "false":
        return False
    if kind == "and":
        return all(_eval_node(n, model) for n in node[1])
    if kind == "or":
        return any(_eval_node(n, model) for n in node[1])
    if kind == "conn":
        return _conn_cut(node, model) is None
    _, coeffs, const = node
    s = sum(c * model.get(v, 0) for v, c in coeffs.items())
    return s == const if kind == "eq" else s <= const


def _conn_cut(node, model):
    """Check a connectivity atom against a model.

    Returns None when satisfied.  Otherwise returns a pair of branch atoms
    that every model of the atom satisfies one of, while the current model
    satisfies neither: either some edge enters the stranded node set from
    outside, or the stranded set is not used at all.
    """
    _, root, edges = node
    present = [(v, s, d) for v, s, d in edges if model.get(v, 0) > 0]
    used = set()
    adj = {}
    for v, s, d in present:
        used.add(s)
        used.add(d)
        adj.setdefault(s, []).append(d)
    reach = {root}
    stack = [root]
    while stack:
        for d in adj.get(stack.pop(), ()):
            if d not in reach:
                reach.add(d)
                stack.append(d)
    bad = used - reach
    if not bad:
        return None
    crossing = {v for v, s, d in edges if d in bad and s not in bad}
    incident = sorted({v for v, s, d in edges if s in bad or d in bad})
    enter = ge({v: 1 for v in crossing}, 1) if crossing else FALSE
    unused = land([eq({v: 1}, 0) for v in incident])
    return (enter, unused)


def _dpll(variables, conjuncts, budget):
    """Lazy handling of non-conjunctive structure: solve the conjunctive part
    first, then branch only on a disjunction the model violates, and enforce
    connectivity atoms by support-graph cuts.  When the conjunction's model
    already satisfies everything (the common case), no case split happens."""
    flat = []
    ors = []
    conns = []
    stack = list(conjuncts)
    while stack:
        c = stack.pop()
        if c[0] == "and":
            stack.extend(c[1])
        elif c[0] == "true":
            continue
        elif c[0] == "or":
            ors.append(c)
        elif c[0] == "conn":
            conns.append(c)
        else:
            flat.append(c)
    model = _solve_conjunction(variables, flat, budget)
    if model is None:
        return None
    for c in ors:
        if not _eval_node(c, model):
            rest = flat + conns + [o for o in ors if o is not c]
            for option in c[1]:
                res = _dpll(variables, rest + [option], budget)
                if res is not None:
                    return res
            return None
    for c in conns:
        cut = _conn_cut(c, model)
        if cut is not None:
            rest = flat + conns + ors
            for option in cut:
                res = _dpll(variables, rest + [option], budget)
                if res is not None:
                    return res
            return None
    return model


def solve(system, node_budget=500_000):
    """Find a natural-number model of the system, or None if there is none.

    Deterministic: disjuncts are tried in order and values smallest-first, so
    the returned model is the first one of a fixed depth-first search.  Raises
    BudgetExceeded instead of returning a wrong verdict when out of budget.
    """
    budget = _Budget(node_budget)
    return _dpll(system.variables, [system.constraint], budget)


def euler_witness(fsa, assignment):
    """A word of L(fsa) whose Parikh vector matches the assignment.

    The assignment must satisfy parikh_fsa(fsa); the edge multiplicities then
    form a connected flow, and Hierholzer's algorithm turns them into a walk
    from the initial to the final state.  Edge ties break by edge index.
    """
    remaining = {}
    total = 0
    for i, e in enumerate(fsa.edges):
        cnt = assignment.get(f"e{i}", 0)
        if cnt:
            remaining[i] = cnt
            total += cnt
    adj = {}
    for i in sorted(remaining):
        adj.setdefault(fsa.edges[i][0], []).append(i)
    stack = []
    trail = []
    cur = fsa.initial
    while True:
        out = adj.get(cur, [])
        picked = None
        for i in out:
            if remaining.get(i, 0) > 0:
                picked = i
                break
        if picked is not None:
            remaining[picked] -= 1
            stack.append((cur, picked))
            cur = fsa.edges[picked][2]
        elif stack:
            v, i = stack.pop()
            trail.append(i)
            cur = v
        else:
            break
    trail.reverse()
    if len(trail) != total or any(c > 0 for c in remaining.values()):
        raise AssertionError("assignment does not describe an Euler walk")
    # simulate to double-check endpoints
    pos = fsa.initial
    for i in trail:
        src, _, dst = fsa.edges[i]
        if src != pos:
            raise AssertionError("Euler walk is not contiguous")
        pos = dst
    if pos != fsa.final:
        raise AssertionError("Euler walk does not end in the final state")
    return [fsa.edges[i][1] for i in trail]


def to_smtlib(system):
    """Debug dump in SMT-LIB2 (linear integer arithmetic) for cross-checks.

    Connectivity atoms are expanded into the textbook depth-variable
    encoding with fresh integer variables.
    """
    def safe(v):
        return v.replace("[", "_").replace("]", "_")

    lines = ["(set-logic QF_LIA)"]
    for v in system.variables:
        lines.append(f"(declare-const {safe(v)} Int)")
        lines.append(f"(assert (>= {safe(v)} 0))")
    extra = []
    counter = [0]

    def emit(node):
        kind = node[0]
        if kind == "true":
            return "true"
        if kind == "false":
            return "false"
        if kind == "and":
            return "(and " + " ".join(emit(n) for n in node[1]) + ")" \
                if node[1] else "true"
        if kind == "or":
            return "(or " + " ".join(emit(n) for n in node[1]) + ")" \
                if node[1] else "false"
        if kind == "conn":
            return emit_conn(node)
        _, coeffs, const = node
        lhs = "(+ " + " ".join(
            f"(* {c} {safe(v)})" for v, c in coeffs.items()) + ")" \
            if coeffs else "0"
        op = "=" if kind == "eq" else "<="
        return f"({op} {lhs} {const})"

    def emit_conn(node):
        _, root, edges = node
        nodes = sorted({n for _, s, d in edges for n in (s, d)} | {root},
                       key=repr)
        idx = counter[0]
        counter[0] += 1
        z = {n: f"conn{idx}_z{i}" for i, n in enumerate(nodes)}
        for n in nodes:
            extra.append(f"(declare-const {z[n]} Int)")
        parts = [f"(= {z[root]} 1)"]
        for n in nodes:
            if n == root:
                continue
            incident = sorted({v for v, s, d in edges if s == n or d == n})
            options = []
            for v, s, d in edges:
                if d != n or s == n:
                    continue
                options.append(f"(and (>= {safe(v)} 1)"
                               f" (= {z[n]} (+ {z[s]} 1)) (>= {z[s]} 1))")
            options.append("(and " + " ".join(
                [f"(= {safe(v)} 0)" for v in incident] + [f"(= {z[n]} 0)"])
                + ")")
            parts.append("(or " + " ".join(options) + ")")
        return "(and " + " ".join(parts) + ")"

    body = emit(system.constraint)
    lines.extend(extra)
    lines.append(f"(assert {body})")
    lines.append("(check-sat)")
    return "\n".join(lines)
