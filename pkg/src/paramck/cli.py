"""Command-line interface.

    paramck check --leader F --contributor F --property F
                  [--mode M] [--contributors K] [--stack-bound B]
                  [--witness OUT] [--json]
    paramck replay --witness F --leader F --contributor F --property F

Exit codes for check: 0 decided (NONEMPTY or EMPTY), 2 input error,
3 budget exceeded.  For replay: 0 valid, 1 invalid, 2 parse/input error.
The PARAMCK_BUDGET environment variable caps both the state exploration and
the solver search.
"""

from __future__ import annotations

import argparse
import json
import sys

from .machines import (BudgetExceeded, Fsm, Pdm, LEADER, CONTRIBUTOR,
                       buchi_product, make_network, validate)
from .explicit import Witness, replay, _ReplayState
from .fileformat import (ParseError, parse_machine_file, parse_witness,
                         print_witness)
from .api import MODES, run_check, replay_network


class InputError(Exception):
    pass


def _load_machine(path, role, want_buchi=None):
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise InputError(f"{path}: {e.strerror or e}")
    try:
        machine, values = parse_machine_file(text, role)
    except ParseError as e:
        raise InputError(f"{path}: {e}")
    if want_buchi is True and machine.accepting is None:
        raise InputError(f"{path}: a Buchi acceptance set is required here")
    if want_buchi is False and machine.accepting is not None:
        raise InputError(f"{path}: unexpected Buchi acceptance set")
    diags = validate(machine, values)
    errors = [d for d in diags if d.startswith("error:")]
    if errors:
        raise InputError(f"{path}: " + "; ".join(errors))
    for d in diags:
        if d.startswith("warning:"):
            print(f"{path}: {d}", file=sys.stderr)
    return machine, values


def _load_network(args):
    prop, pvals = _load_machine(args.property, LEADER, want_buchi=True)
    if not isinstance(prop, Fsm):
        raise InputError(f"{args.property}: the property must be a Buchi FSM")
    leader, lvals = _load_machine(args.leader, LEADER)
    contributor, cvals = _load_machine(args.contributor, CONTRIBUTOR,
                                       want_buchi=False)
    values = sorted(set(pvals) | set(lvals) | set(cvals))
    return make_network(values, buchi_product(prop, leader), contributor)


def _witness_json(w):
    out = {"k": w.k, "stem": [list(s) for s in w.stem],
           "cycle": [list(s) for s in w.cycle]}
    if w.pivot is not None:
        out["pivot"] = str(w.pivot[1])
    return out


def _cmd_check(args):
    net = _load_network(args)
    if args.mode == "explicit":
        if args.contributors is None:
            raise InputError("explicit mode needs --contributors")
        if (isinstance(net.leader, Pdm) or isinstance(net.contributor, Pdm)) \
                and args.stack_bound is None:
            raise InputError("explicit mode with a PDM needs --stack-bound")
    try:
        verdict, mode = run_check(net, args.mode, k=args.contributors,
                                  stack_bound=args.stack_bound)
    except ValueError as e:
        raise InputError(str(e))
    except BudgetExceeded as e:
        print(f"BUDGET: {e}")
        return 3

    if args.json:
        report = {"verdict": verdict.kind, "mode": mode,
                  "statistics": verdict.stats}
        if verdict.witness is not None:
            report["witness"] = _witness_json(verdict.witness)
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print(verdict.kind)
        if verdict.stats:
            for key in sorted(verdict.stats):
                print(f"  {key}: {verdict.stats[key]}", file=sys.stderr)
    if verdict.kind == "BUDGET":
        return 3
    if verdict.witness is not None and args.witness:
        with open(args.witness, "w", encoding="utf-8") as f:
            f.write(print_witness(verdict.witness))
    return 0


def _cmd_replay(args):
    net = _load_network(args)
    net = replay_network(net)
    try:
        with open(args.witness, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise InputError(f"{args.witness}: {e.strerror or e}")
    try:
        w, pivot_symbol = parse_witness(text)
    except ParseError as e:
        raise InputError(f"{args.witness}: {e}")

    if isinstance(net.leader, Pdm):
        # reconstruct the pivot from the stem; the file only pins its symbol
        st = _ReplayState(net, max(w.k, 1))
        for idx, (actor, tid) in enumerate(w.stem):
            err = st.apply(actor, tid)
            if err is not None:
                print(f"invalid at step {idx}: {err}")
                return 1
        if pivot_symbol is not None and st.leader_stack \
                and st.leader_stack[0] != pivot_symbol:
            print(f"invalid: stem ends with {st.leader_stack[0]!r} on top,"
                  f" witness declares pivot {pivot_symbol!r}")
            return 1
        w = Witness(w.k, w.stem, w.cycle,
                    (st.leader_state, st.leader_stack[0]))
    status, detail = replay(net, w)
    if status == "valid":
        print("valid")
        return 0
    idx, reason = detail
    print(f"invalid at step {idx}: {reason}")
    return 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="paramck",
        description="Liveness checker for leader/contributor register networks")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="decide the parameterized property")
    p_check.add_argument("--leader", required=True)
    p_check.add_argument("--contributor", required=True)
    p_check.add_argument("--property", required=True)
    p_check.add_argument("--mode", choices=MODES, default="auto")
    p_check.add_argument("--contributors", type=int,
                         help="population size (explicit mode)")
    p_check.add_argument("--stack-bound", type=int,
                         help="stack cap (explicit mode with PDMs)")
    p_check.add_argument("--witness", help="write the witness here")
    p_check.add_argument("--json", action="store_true")
    p_check.set_defaults(func=_cmd_check)

    p_replay = sub.add_parser("replay", help="validate a witness file")
    p_replay.add_argument("--witness", required=True)
    p_replay.add_argument("--leader", required=True)
    p_replay.add_argument("--contributor", required=True)
    p_replay.add_argument("--property", required=True)
    p_replay.set_defaults(func=_cmd_replay)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
