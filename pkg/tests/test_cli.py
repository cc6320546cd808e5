import json

import pytest

from paramck.cli import main


RING_LEADER = """\
kind = fsm
values = 1 2 3
states = p0 p1 p2
initial = p0
trans = p0 r(1) p1
trans = p1 r(2) p2
trans = p2 r(3) p0
"""

RING_CONTRIB = """\
kind = fsm
values = 1 2 3
states = A B C D E F G
initial = A
trans = A w(1) B
trans = B r(3) C
trans = C r(1) A
trans = A w(2) D
trans = D r(1) E
trans = E r(2) A
trans = A w(3) F
trans = F r(2) G
trans = G r(3) A
"""

RING_PROP = """\
kind = buchi-fsm
values = 1 2 3
states = s0 s1
initial = s0
accepting = s1
trans = s0 r(1) s1
trans = s0 r(2) s0
trans = s0 r(3) s0
trans = s1 r(1) s1
trans = s1 r(2) s0
trans = s1 r(3) s0
"""

COUNTER_LEADER = """\
kind = pdm
values = 1 2
states = d0 d1
initial = d0
stack = Z A
rule = d0 r(1) Z -> d1 push A
rule = d0 r(1) A -> d1 push A
rule = d1 r(1) A -> d1 push A
rule = d1 r(2) A -> d1 pop
rule = d1 r(2) Z -> d0 push A
"""

COUNTER_CONTRIB = """\
kind = fsm
values = 1 2
states = q0 q1
initial = q0
trans = q0 w(1) q1
trans = q1 w(2) q0
"""

COUNTER_PROP = """\
kind = buchi-fsm
values = 1 2
states = s
initial = s
accepting = s
trans = s r(1) s
trans = s r(2) s
"""


def write_net(tmp_path, leader, contrib, prop):
    paths = {}
    for name, text in (("leader", leader), ("contrib", contrib),
                       ("prop", prop)):
        p = tmp_path / f"{name}.mk"
        p.write_text(text)
        paths[name] = str(p)
    return paths


def check_args(paths, *extra):
    return ["check", "--leader", paths["leader"],
            "--contributor", paths["contrib"],
            "--property", paths["prop"], *extra]


def replay_args(paths, witness):
    return ["replay", "--witness", witness,
            "--leader", paths["leader"],
            "--contributor", paths["contrib"],
            "--property", paths["prop"]]


def test_check_plain_output(tmp_path, capsys):
    paths = write_net(tmp_path, RING_LEADER, RING_CONTRIB, RING_PROP)
    assert main(check_args(paths)) == 0
    assert capsys.readouterr().out.splitlines()[0] == "NONEMPTY"


def test_check_json_report(tmp_path, capsys):
    paths = write_net(tmp_path, RING_LEADER, RING_CONTRIB, RING_PROP)
    assert main(check_args(paths, "--json")) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] == "NONEMPTY"
    assert report["mode"] == "fsm-fsm"
    assert isinstance(report["statistics"], dict)
    w = report["witness"]
    assert w["k"] >= 1 and w["cycle"]
    actor, tid = w["cycle"][0]
    assert isinstance(actor, int) and isinstance(tid, str)


def test_check_writes_replayable_witness(tmp_path, capsys):
    paths = write_net(tmp_path, RING_LEADER, RING_CONTRIB, RING_PROP)
    out = str(tmp_path / "out.wit")
    assert main(check_args(paths, "--witness", out)) == 0
    capsys.readouterr()
    assert main(replay_args(paths, out)) == 0
    assert capsys.readouterr().out.strip() == "valid"


def test_check_explicit_mode(tmp_path, capsys):
    paths = write_net(tmp_path, RING_LEADER, RING_CONTRIB, RING_PROP)
    assert main(check_args(paths, "--mode", "explicit",
                           "--contributors", "4")) == 0
    assert capsys.readouterr().out.splitlines()[0] == "NONEMPTY"
    # k = 1 is too few contributors to feed the ring
    assert main(check_args(paths, "--mode", "explicit",
                           "--contributors", "1")) == 0
    assert capsys.readouterr().out.splitlines()[0] == "EMPTY"


def test_explicit_mode_needs_contributor_count(tmp_path, capsys):
    paths = write_net(tmp_path, RING_LEADER, RING_CONTRIB, RING_PROP)
    assert main(check_args(paths, "--mode", "explicit")) == 2
    assert "explicit mode needs" in capsys.readouterr().err


def test_pdm_leader_end_to_end(tmp_path, capsys):
    paths = write_net(tmp_path, COUNTER_LEADER, COUNTER_CONTRIB, COUNTER_PROP)
    out = str(tmp_path / "out.wit")
    assert main(check_args(paths, "--json", "--witness", out)) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] == "NONEMPTY"
    assert report["mode"] == "pdm-fsm"
    assert "pivot" in report["witness"]
    text = (tmp_path / "out.wit").read_text()
    assert "pivot =" in text
    assert main(replay_args(paths, out)) == 0
    assert capsys.readouterr().out.strip() == "valid"


def test_replay_rejects_wrong_pivot_symbol(tmp_path, capsys):
    paths = write_net(tmp_path, COUNTER_LEADER, COUNTER_CONTRIB, COUNTER_PROP)
    out = str(tmp_path / "out.wit")
    assert main(check_args(paths, "--witness", out)) == 0
    capsys.readouterr()
    text = (tmp_path / "out.wit").read_text()
    assert "pivot = " in text
    symbol = text.split("pivot = ")[1].split()[0]
    other = "A" if symbol == "Z" else "Z"
    tampered = tmp_path / "bad.wit"
    tampered.write_text(text.replace(f"pivot = {symbol}", f"pivot = {other}"))
    assert main(replay_args(paths, str(tampered))) == 1
    assert "invalid" in capsys.readouterr().out


def test_replay_rejects_tampered_cycle(tmp_path, capsys):
    paths = write_net(tmp_path, RING_LEADER, RING_CONTRIB, RING_PROP)
    out = str(tmp_path / "out.wit")
    assert main(check_args(paths, "--witness", out)) == 0
    capsys.readouterr()
    lines = (tmp_path / "out.wit").read_text().splitlines()
    lines = lines[: lines.index("cycle:") + 1] + ["0 c0"]
    tampered = tmp_path / "bad.wit"
    tampered.write_text("\n".join(lines) + "\n")
    assert main(replay_args(paths, str(tampered))) == 1
    assert "invalid at step" in capsys.readouterr().out


def test_replay_malformed_witness(tmp_path, capsys):
    paths = write_net(tmp_path, RING_LEADER, RING_CONTRIB, RING_PROP)
    bad = tmp_path / "bad.wit"
    bad.write_text("k = 1\n0 d0\n")
    assert main(replay_args(paths, str(bad))) == 2
    assert "error:" in capsys.readouterr().err


def test_missing_machine_file(tmp_path, capsys):
    paths = write_net(tmp_path, RING_LEADER, RING_CONTRIB, RING_PROP)
    paths["leader"] = str(tmp_path / "nope.mk")
    assert main(check_args(paths)) == 2
    assert "error:" in capsys.readouterr().err


def test_property_must_be_buchi(tmp_path, capsys):
    paths = write_net(tmp_path, RING_LEADER, RING_CONTRIB,
                      RING_PROP.replace("kind = buchi-fsm", "kind = fsm")
                               .replace("accepting = s1\n", ""))
    assert main(check_args(paths)) == 2
    assert "Buchi" in capsys.readouterr().err


def test_mode_mismatch_is_an_input_error(tmp_path, capsys):
    paths = write_net(tmp_path, RING_LEADER, RING_CONTRIB, RING_PROP)
    assert main(check_args(paths, "--mode", "pdm-fsm")) == 2
    assert "pdm-fsm mode needs" in capsys.readouterr().err


def test_budget_env_variable(tmp_path, capsys, monkeypatch):
    paths = write_net(tmp_path, RING_LEADER, RING_CONTRIB, RING_PROP)
    monkeypatch.setenv("PARAMCK_BUDGET", "3")
    assert main(check_args(paths)) == 3
    assert "BUDGET" in capsys.readouterr().out
