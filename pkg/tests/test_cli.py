import subprocess
import sys

import pytest

from hessbound.bench import AGGREGATE_HEADER, TRIALS_HEADER
from hessbound.cli import main

EXAMPLE = "exp(x1-2*x2^2+3*x3^3)"
EXAMPLE_BOX = "-0.3,0.2;-0.1,0.6;-0.4,0.5"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_bounds_output(out):
    return {parts[0]: (float(parts[1]), float(parts[2])) for parts in (l.split() for l in out.splitlines())}


def test_bounds_example(capsys):
    code, out, _ = run(capsys, "bounds", "--expr", EXAMPLE, "--box", EXAMPLE_BOX, "--methods", "A,G,H")
    assert code == 0
    got = parse_bounds_output(out)
    assert list(got) == ["A", "G", "H"]
    assert got["A"] == pytest.approx((-19.904, 37.004), abs=5e-4)
    # G and H carry the difference between the exact Hessian and its 3-decimal print
    assert got["G"] == pytest.approx((-26.391, 38.587), abs=1.5e-3)
    assert got["H"] == pytest.approx((-20.597, 29.603), abs=1.5e-3)


def test_bounds_affine_prints_zeros(capsys):
    code, out, _ = run(capsys, "bounds", "--expr", "2*x1 - x2 + 1", "--box", "-1,1;0,3", "--methods", "A,G,H,S")
    assert code == 0
    assert [l.split()[1:] for l in out.splitlines()] == [["0", "0"]] * 4


def test_bounds_domain_violation(capsys):
    code, _, err = run(capsys, "bounds", "--expr", "ln(x1)", "--box", "-1,1")
    assert code == 2 and "domain" in err


def test_bounds_dimension_cap(capsys):
    code, _, _ = run(capsys, "bounds", "--expr", "x1*x2*x3", "--box", "0,1;0,1;0,1", "--max-dim", "2")
    assert code == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["bounds", "--expr", "x1 +", "--box", "0,1"],
        ["bounds", "--expr", "x1", "--box", "1,0"],
        ["bounds", "--expr", "x1", "--box", "0,1", "--methods", "Q"],
        ["bounds", "--expr", "x1"],
        ["nosuchcommand"],
        ["bench", "--corpus", "builtin:nope"],
    ],
)
def test_input_errors_exit_1(capsys, argv):
    assert run(capsys, *argv)[0] == 1


def test_codelist_dump_and_trace(capsys):
    code, out, _ = run(capsys, "codelist", "--expr", EXAMPLE)
    assert code == 0 and out.splitlines()[3] == "y4 = square(y2)"
    code, out, _ = run(capsys, "codelist", "--expr", EXAMPLE, "--box", EXAMPLE_BOX, "--hessian")
    assert code == 0
    assert out.count("eig ") == 10 and out.count("hess ") == 30


def test_count_example(capsys):
    code, out, _ = run(capsys, "count", "--expr", EXAMPLE)
    assert code == 0
    totals = [l for l in out.splitlines() if l.startswith("N_A=")][0]
    fields = dict(kv.split("=") for kv in totals.split())
    assert fields["N_A"] == "163" and fields["dNA"] == "73"
    assert 322 <= int(fields["N_G"]) <= 326
    assert "hertz_rohn=O(2^n n^3)" in out


def test_count_identity(capsys):
    code, out, _ = run(capsys, "count", "--expr", "x1")
    assert code == 0 and "N_A=0 " in out


def test_count_ratio_falls_with_dimension(capsys):
    ratios = []
    for n in (2, 4, 8, 16):
        expr = "+".join(f"x{i}^2" for i in range(1, n + 1))
        run_out = run(capsys, "count", "--expr", expr)[1]
        line = [l for l in run_out.splitlines() if l.startswith("N_A=")][0]
        ratios.append(float(line.split("N_A/N_G=")[1].split("%")[0]))
    assert ratios == sorted(ratios, reverse=True) and len(set(ratios)) == 4


def test_oracle_command(capsys):
    code, out, _ = run(capsys, "oracle", "--expr", "x1*x2", "--box", "0,1;2,3", "--samples", "20")
    assert code == 0 and out.split() == ["S", "-1", "1"]


def test_bench_empty_corpus(tmp_path, capsys):
    corpus = tmp_path / "empty.txt"
    corpus.write_text("# nothing here\n")
    code, _, _ = run(capsys, "bench", "--corpus", str(corpus), "--out", str(tmp_path / "out"))
    assert code == 0
    assert (tmp_path / "out" / "aggregate.csv").read_text() == ",".join(AGGREGATE_HEADER) + "\n"
    assert (tmp_path / "out" / "trials.csv").read_text() == ",".join(TRIALS_HEADER) + "\n"


def test_bench_illustrative_labels(tmp_path, capsys):
    out = tmp_path / "ill"
    code, _, _ = run(
        capsys, "bench", "--corpus", "builtin:illustrative", "--boxes-file", "builtin:illustrative", "--out", str(out)
    )
    assert code == 0
    rows = [l.split(",") for l in (out / "trials.csv").read_text().splitlines()[1:]]
    assert [(r[-2], r[-1]) for r in rows] == [("++", "+"), ("o", "-"), ("+", "o"), ("-", "++")]


def test_bench_unknown_boxes_case(tmp_path, capsys):
    boxes = tmp_path / "b.txt"
    boxes.write_text("nobody; 0,1, 0,1, 0,1\n")
    code, _, _ = run(capsys, "bench", "--corpus", "builtin:illustrative", "--boxes-file", str(boxes), "--out", str(tmp_path))
    assert code == 1


def test_bench_repeatable(tmp_path, capsys):
    texts = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        assert run(capsys, "bench", "--corpus", "builtin:illustrative", "--trials", "5", "--out", str(out))[0] == 0
        texts.append([(out / f).read_text() for f in ("trials.csv", "aggregate.csv", "ranking.csv", "report.md")])
    assert texts[0] == texts[1]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "hessbound", "bounds", "--expr", "x1^2", "--box", "-1,1"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines() == ["A 0 2", "G 2 2", "H 2 2"]
