import random

from paramck.machines import Fsm, buchi_product, make_network
from paramck.abstraction import reachable_abstract
from paramck.cyclesearch import (build_cycle_fsa, check_fsm_fsm,
                                 q_preserving_successors,
                                 realizability_system)
from paramck.explicit import check_explicit, replay
from paramck import parikh
from fixtures import la, ca, ring_network, stalled_network, \
    random_fsm_network


def full_q_accepting_config(net):
    reach = reachable_abstract(net)
    best = None
    for a in reach.order:
        if a.leader_state not in net.leader.accepting:
            continue
        if best is None or len(a.Q) > len(best.Q):
            best = a
    return reach, best


def test_cycle_fsa_is_strongly_connected_on_ring():
    net = ring_network()
    _, a = full_q_accepting_config(net)
    assert a.Q == frozenset("ABCDEFG")
    fsa = build_cycle_fsa(net, a)
    # anchored at a with only mutually reachable configurations kept
    assert fsa.initial == fsa.final == a
    used_leader_actions = {str(net.transition(lab).action)
                           for _, lab, _ in fsa.edges if lab.startswith("d")}
    assert used_leader_actions == {"r(1)", "r(2)", "r(3)"}
    # every state can reach and be reached from the anchor by construction
    import networkx
    g = networkx.DiGraph((src, dst) for src, _, dst in fsa.edges)
    for s in fsa.states:
        assert networkx.has_path(g, a, s) and networkx.has_path(g, s, a)


def test_q_preserving_moves_keep_q():
    net = ring_network()
    _, a = full_q_accepting_config(net)
    for _, b in q_preserving_successors(net, a):
        assert b.Q == a.Q


def test_realizability_infeasible_for_stalled_net():
    net = stalled_network()
    reach = reachable_abstract(net)
    for a in reach.order:
        if a.leader_state not in net.leader.accepting:
            continue
        fsa = build_cycle_fsa(net, a)
        system = realizability_system(net, fsa)
        assert parikh.solve(system) is None


def test_ring_decision_with_witness():
    net = ring_network()
    v = check_fsm_fsm(net)
    assert v.kind == "NONEMPTY"
    assert replay(net, v.witness) == ("valid", None)


def test_stalled_decision_empty():
    assert check_fsm_fsm(stalled_network()).kind == "EMPTY"


def test_self_feeding_contributor_nonempty():
    # a single contributor writing 1 forever keeps the leader reading 1
    leader = Fsm(frozenset(["d"]), "d", (("d", la("read", "1"), "d"),),
                 frozenset(["d"]))
    contrib = Fsm(frozenset(["q"]), "q", (("q", ca("write", "1"), "q"),))
    net = make_network(["1"], leader, contrib)
    v = check_fsm_fsm(net)
    assert v.kind == "NONEMPTY"
    assert replay(net, v.witness) == ("valid", None)


def test_agrees_with_explicit_oracle():
    rng = random.Random(77)
    for _ in range(60):
        net = random_fsm_network(rng)
        v = check_fsm_fsm(net)
        if v.kind == "NONEMPTY":
            assert replay(net, v.witness) == ("valid", None)
        else:
            assert v.kind == "EMPTY"
            for k in (1, 2, 3):
                assert check_explicit(net, k).kind == "EMPTY"
        if check_explicit(net, 3).kind == "NONEMPTY":
            assert v.kind == "NONEMPTY"
