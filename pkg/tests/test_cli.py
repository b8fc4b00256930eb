import json

from potentskp.cli import EXIT_CERT, EXIT_INPUT, EXIT_OK, EXIT_THRESHOLD, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, [json.loads(line) for line in out.splitlines() if line.strip()]


def test_bounds_tree_group(capsys):
    code, (rec,) = run(capsys, "bounds", "--group", "fabgup")
    assert code == EXIT_OK
    assert rec["length_factor"] == 72272200 and rec["branching_factor"] == 186200


def test_diameter_cyclic(capsys):
    code, (rec,) = run(capsys, "diameter", "--group", "cyclic", "--q", "3")
    assert code == EXIT_OK and rec["directed_diameter"] == 2


def test_navigate_sl2_is_reproducible(capsys):
    args = ("navigate", "--group", "sl2", "--q", "2", "--depth", "4", "--schedule", "auto:3",
            "--gens", "canonical+random:1", "--random", "3", "--seed", "7")
    code1, recs1 = run(capsys, *args)
    main(list(args))
    raw2 = capsys.readouterr().out
    main(list(args))
    raw3 = capsys.readouterr().out
    assert code1 == EXIT_OK and len(recs1) == 3
    assert raw2 == raw3
    assert all(r["certified"] and r["evaluation_ok"] for r in recs1)


def test_navigate_tree_group_word(capsys):
    code, (rec,) = run(capsys, "navigate", "--group", "fabgup", "--depth", "4", "--element", "abab")
    assert code == EXIT_OK and rec["certified"]


def test_verify_sl2(capsys):
    code, (rec,) = run(capsys, "verify", "--group", "sl2", "--q", "2", "--depth", "8", "--schedule", "auto:6",
                         "--samples", "5")
    assert code == EXIT_OK and rec["ok"]


def test_spectrum(capsys):
    code, (rec,) = run(capsys, "spectrum", "--group", "fabgup", "--depth", "2")
    assert code == EXIT_OK and rec["order"] == 81 and rec["gap_ok"]


def test_spectrum_trivial_group_is_valid_json(capsys):
    code, (rec,) = run(capsys, "spectrum", "--group", "cyclic", "--q", "1")
    assert code == EXIT_OK and rec["lambda_2"] is None


def test_bad_element_exit_code(capsys):
    code, _ = run(capsys, "navigate", "--group", "fabgup", "--depth", "4", "--element", "abc")
    assert code == EXIT_INPUT


def test_missing_targets_exit_code(capsys):
    code, _ = run(capsys, "navigate", "--group", "sl2", "--depth", "4")
    assert code == EXIT_INPUT


def test_threshold_exit_code(capsys):
    code, _ = run(capsys, "diameter", "--group", "fabgup", "--depth", "3", "--threshold", "100")
    assert code == EXIT_THRESHOLD


def test_budget_exit_code(capsys):
    code, _ = run(capsys, "navigate", "--group", "sl2", "--depth", "8", "--schedule", "auto:6", "--random", "1",
                    "--max-calls", "1")
    assert code == EXIT_THRESHOLD


def test_stalling_schedule_is_bad_input(capsys):
    code, _ = run(capsys, "verify", "--group", "sl2", "--depth", "8", "--schedule", "auto:3")
    assert code == EXIT_INPUT


def test_output_file(tmp_path, capsys):
    out = tmp_path / "b.jsonl"
    assert main(["bounds", "--group", "sl2", "--out", str(out)]) == EXIT_OK
    rec = json.loads(out.read_text())
    assert rec["command"] == "bounds" and rec["bound_l"] > 0


def test_exit_codes_distinct():
    assert len({EXIT_OK, EXIT_CERT, EXIT_INPUT, EXIT_THRESHOLD}) == 4
