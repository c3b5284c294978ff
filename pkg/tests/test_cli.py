import json

import pytest

from app.analysis.helta import infer, serialize
from app.analysis.trees import parse_tree
from app.config import settings

SELF_COPY = "GetModuleFileName(1(0),2>1(CopyFile))"
EXPECTED_PATTERNS = [
    "GetModuleFileName(1(0))",
    "GetModuleFileName(1(0),2>1(CopyFile))",
    "GetModuleFileName(2>1(CopyFile))",
]


# --- extract / inspect -----------------------------------------------------

def test_extract_self_copy(cli, corpus_dir):
    code, out, _ = cli("extract", corpus_dir / "examples" / "self_copy.tasm")
    assert code == 0
    assert out.splitlines() == ["CopyFile", SELF_COPY]


def test_extract_output_reparses(cli, corpus_dir):
    _, out, _ = cli("extract", "--matching", "permissive", "--leaves", "all", corpus_dir / "examples" / "self_copy_exit.tasm")
    lines = out.splitlines()
    assert lines == sorted(lines)
    assert [str(parse_tree(line)) for line in lines] == lines


def test_extract_without_api_calls_prints_nothing(cli, corpus_dir):
    assert cli("extract", corpus_dir / "examples" / "no_api.tasm") == (0, "", "")


def test_inspect_program_dumps_trimmed_configurations(cli, corpus_dir):
    code, out, _ = cli("inspect", "--program", corpus_dir / "examples" / "self_copy.tasm")
    assert code == 0
    trimmed = out.split("# trimmed\n", 1)[1].splitlines()
    assert trimmed == [
        "<@CopyFile{ebx=0}, r:l7 m ? ?>",
        "<@GetModuleFileName{ebx=0}, r:l5 0 m ?>",
    ]
    assert "# entry <l1, ε>" in out


def test_inspect_database_is_stable(cli, learned_db):
    first = cli("inspect", "--db", learned_db)
    second = cli("inspect", "--db", learned_db)
    assert first == second
    code, out, _ = first
    assert code == 0
    assert "patterns 3" in out
    assert f"  {SELF_COPY}" in out.splitlines()


# --- learn / detect --------------------------------------------------------

def test_learn_golden_corpus(cli, tmp_path, training_files):
    db = tmp_path / "db.json"
    code, out, _ = cli("learn", *training_files, "--out", db)
    assert code == 0
    assert json.loads(db.read_text(encoding="utf-8"))["patterns"] == EXPECTED_PATTERNS
    assert out.splitlines()[-1] == f"LEARNED 3 patterns from 18 trees -> {db}"


def test_detect_heldout_variants(cli, learned_db, heldout_files):
    code, out, _ = cli("detect", "--db", learned_db, *heldout_files)
    assert code == 3
    assert out.splitlines() == [f"MALICIOUS {path} witness={SELF_COPY}" for path in heldout_files]


def test_detect_benign_programs(cli, learned_db, benign_files):
    code, out, _ = cli("detect", "--db", learned_db, *benign_files)
    assert code == 0
    assert out.splitlines() == [f"BENIGN {path}" for path in benign_files]


def test_training_files_detect_themselves(cli, learned_db, training_files):
    code, out, _ = cli("detect", "--db", learned_db, *training_files)
    assert code == 3
    assert all(line.startswith("MALICIOUS ") for line in out.splitlines())


def test_label_manifest_scores_the_run(cli, learned_db, heldout_files, benign_files, corpus_dir):
    code, out, _ = cli(
        "detect", "--db", learned_db, "--labels", corpus_dir / "labels.tsv", "--report", "json",
        *heldout_files, *benign_files,
    )
    report = json.loads(out)
    assert code == 3
    assert report["command"] == "detect"
    assert (report["malicious"], report["benign"]) == (10, 10)
    assert (report["true_positives"], report["false_positives"]) == (10, 0)
    assert (report["true_negatives"], report["false_negatives"]) == (10, 0)
    assert all("elapsed_seconds" not in row for row in report["files"])
    assert sum(row["trees"] for row in report["files"]) == report["total_trees"]


def test_runs_are_byte_identical(cli, tmp_path, training_files, heldout_files, benign_files):
    outputs = []
    for run in ("a", "b"):
        db = tmp_path / f"{run}.json"
        _, learn_out, _ = cli("learn", *training_files, "--out", db, "--report", "json")
        _, detect_out, _ = cli("detect", "--db", db, "--report", "json", *heldout_files, *benign_files)
        outputs.append((db.read_bytes(), learn_out, detect_out))
    assert outputs[0] == outputs[1]


def test_parallel_extraction_gives_the_same_database(cli, tmp_path, training_files):
    serial, parallel = tmp_path / "serial.json", tmp_path / "parallel.json"
    cli("learn", *training_files, "--out", serial)
    code, _, _ = cli("learn", *training_files, "--out", parallel, "--workers", "2")
    assert code == 0
    assert serial.read_bytes() == parallel.read_bytes()


def test_timings_are_opt_in(cli, tmp_path, training_files):
    _, out, _ = cli("learn", *training_files[:1], "--out", tmp_path / "db.json", "--report", "json", "--timings")
    assert "elapsed_seconds" in json.loads(out)["files"][0]


def test_benign_subtraction(cli, tmp_path, training_files):
    db = tmp_path / "db.json"
    code, _, _ = cli("learn", *training_files, "--benign", training_files[0], "--out", db)
    assert code == 0
    assert json.loads(db.read_text(encoding="utf-8"))["patterns"] == []


def test_empty_database_flags_nothing(cli, tmp_path, heldout_files):
    db = tmp_path / "empty.json"
    db.write_text(serialize(infer([]), 0.6, 2, 2), encoding="utf-8")
    code, out, _ = cli("detect", "--db", db, *heldout_files)
    assert code == 0
    assert all(line.startswith("BENIGN ") for line in out.splitlines())


def test_single_file_full_support(cli, tmp_path, corpus_dir):
    db = tmp_path / "db.json"
    code, _, _ = cli("learn", corpus_dir / "examples" / "self_copy.tasm", "--support", "1.0", "--min-nodes", "1", "--out", db)
    assert code == 0
    # sólo CopyFile aparece en los dos árboles del archivo
    assert json.loads(db.read_text(encoding="utf-8"))["patterns"] == ["CopyFile"]


# --- exit codes ------------------------------------------------------------

def test_learn_without_files_is_a_usage_error(cli, tmp_path):
    code, _, err = cli("learn", "--out", tmp_path / "db.json")
    assert code == 1
    assert "error:" in err


@pytest.mark.parametrize("argv", [["frobnicate"], [], ["learn", "x.tasm", "--out", "db", "--support", "0"]])
def test_usage_errors_exit_1(cli, argv):
    assert cli(*argv)[0] == 1


def test_missing_file_exits_1(cli, tmp_path, learned_db):
    code, _, err = cli("detect", "--db", learned_db, tmp_path / "missing.tasm")
    assert code == 1
    assert "missing.tasm" in err


def test_parse_error_names_file_and_line(cli, tmp_path):
    bad = tmp_path / "bad.tasm"
    bad.write_text("l1: push a\nl2: call DeleteFile\n", encoding="utf-8")
    code, _, err = cli("extract", bad)
    assert code == 1
    assert f"{bad}:2:" in err and "DeleteFile" in err


def test_corrupt_database_exits_2(cli, tmp_path, heldout_files):
    db = tmp_path / "corrupt.json"
    db.write_text('{"version": 9}', encoding="utf-8")
    assert cli("detect", "--db", db, *heldout_files)[0] == 2
    assert cli("inspect", "--db", db)[0] == 2


def test_missing_database_exits_1(cli, tmp_path, heldout_files):
    assert cli("detect", "--db", tmp_path / "nope.json", *heldout_files)[0] == 1


def test_miner_cap_exits_2(cli, tmp_path, training_files, monkeypatch):
    monkeypatch.setattr(settings, "max_patterns", 3)
    code, _, err = cli("learn", *training_files, "--out", tmp_path / "db.json")
    assert code == 2
    assert "umbral de soporte" in err


CHAIN = """\
.api A arity=1 types=out
.api B arity=2 types=in,out
.api C arity=2 types=in,out
.api D arity=1 types=in
l1: push x
l2: call A
l3: push y
l4: push x
l5: call B
l6: push z
l7: push y
l8: call C
l9: push z
l10: call D
l11: halt
"""


def test_detect_extracts_at_the_database_height(cli, tmp_path):
    program = tmp_path / "chain.tasm"
    program.write_text(CHAIN, encoding="utf-8")
    db = tmp_path / "db.json"
    code, _, _ = cli("learn", program, "--height", "3", "--support", "0.25", "--min-nodes", "4", "--out", db)
    assert code == 0
    stored = json.loads(db.read_text(encoding="utf-8"))
    assert (stored["height"], stored["patterns"]) == (3, ["A(1>1(B(2>1(C(2>1(D))))))"])

    code, out, _ = cli("detect", "--db", db, program)
    assert code == 3
    assert out == f"MALICIOUS {program} witness=A(1>1(B(2>1(C(2>1(D))))))\n"
    # una altura explícita sigue mandando
    assert cli("detect", "--db", db, "--height", "2", program)[:2] == (0, f"BENIGN {program}\n")
