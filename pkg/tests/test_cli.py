import math

import pytest

from conftest import random_cross_poly
from hcross import lab
from hcross.cli import main
from hcross.freq_index import cross_size, layer_rank
from hcross.spectral import project_cross


def test_cross(tmp_path):
    out = tmp_path / "q.csv"
    assert main(["cross", "--dim", "2", "--level", "3", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == cross_size(3, 2)
    assert main(["cross", "--dim", "3", "--level", "2", "--layer", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == layer_rank(2, 3)


def test_cross_stdout(capsys):
    main(["cross", "--dim", "1", "--level", "1"])
    assert capsys.readouterr().out.split() == ["-1", "0", "1"]


@pytest.mark.parametrize(
    "argv,rows",
    [
        (["--type", "dirichlet", "--order", "3"], 7),
        (["--type", "vp", "--order", "4"], 15),
        (["--type", "block", "--scale", "1,2"], 4 * 10),
        (["--type", "bernoulli", "--r", "2", "--alpha", "0,0", "--K", "3"], 7 * 7),
    ],
)
def test_kernel_tables(tmp_path, argv, rows):
    out = tmp_path / "k.csv"
    assert main(["kernel", *argv, "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == rows


def test_kernel_samples(tmp_path):
    out = tmp_path / "k.csv"
    main(["kernel", "--type", "dirichlet", "--order", "2", "--points", "8", "--out", str(out)])
    lines = out.read_text().splitlines()
    assert len(lines) == 8
    x0, v0 = map(float, lines[0].split(","))
    assert x0 == 0 and v0 == pytest.approx(5.0)
    main(["kernel", "--type", "block", "--scale", "0,1", "--points", "4", "--out", str(out)])
    assert len(out.read_text().splitlines()) == 16


@pytest.mark.parametrize("kind", ["sharp", "vp"])
def test_project(tmp_path, kind):
    f = random_cross_poly(5, 2, seed=1)
    src, dst = tmp_path / "in.csv", tmp_path / "out.csv"
    lab.write_coefficients(f, src)
    assert main(["project", "--level", "3", "--kind", kind, "--in", str(src), "--out", str(dst)]) == 0
    g = lab.read_coefficients(dst)
    if kind == "sharp":
        assert g.equals(project_cross(f, 3))
    else:
        assert set(map(tuple, g.freqs)) >= set(map(tuple, project_cross(f, 3).freqs))


def test_mterm_stdout(capsys):
    argv = ["mterm", "--class", "H", "--r", "0.4", "--p", "inf", "--m", "64",
            "--fn", "random_H_ball", "--param", "level=6", "--dim", "2"]
    assert main(argv) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ",".join(lab.CSV_HEADER)
    fields = lines[1].split(",")
    assert fields[0] == "layered_H" and fields[4] == "inf" and int(fields[8]) <= 64


def test_mterm_greedy_file(tmp_path):
    out = tmp_path / "m.csv"
    argv = ["mterm", "--method", "greedy", "--class", "W", "--r", "0.4", "--p", "4", "--m", "32",
            "--fn", "tensor_decay", "--param", "beta=1.5", "--param", "box=64", "--dim", "1", "--out", str(out)]
    assert main(argv) == 0
    text = out.read_text()
    assert "upper bounds" in text.splitlines()[0]
    (row,) = lab.read_report(out)
    assert row["method"] == "greedy" and row["units_used"] == 32


def test_smolyak(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["smolyak", "--dim", "2", "--level", "4", "--fn", "random_H_ball",
                 "--param", "level=6", "--out", str(out)]) == 0
    rows = lab.read_report(out)
    assert [r["m"] for r in rows] == sorted(r["m"] for r in rows) and len(rows) == 5
    assert rows[-1]["error_l2"] < rows[0]["error_l2"]


def test_bench_fit_compare(tmp_path, capsys):
    cfg = tmp_path / "e.ini"
    cfg.write_text(
        "[experiment]\nmethod = greedy\ndim = 1\nm_first = 16\nm_last = 1024\noutput = g.csv\n"
        "[class]\nfamily = W\nr = 1.0\np = 2\n"
        "[function]\nname = tensor_decay\nbeta = 1.5\nbox = 4096\n"
    )
    assert main(["bench", "--config", str(cfg)]) == 0
    report = tmp_path / "g.csv"
    assert len(lab.read_report(report)) == 7
    assert main(["fit", "--in", str(report), "--column", "error_l2"]) == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("greedy error_l2: main_rate=")
    rate = float(line.split("main_rate=")[1].split()[0])
    assert rate == pytest.approx(1.0, abs=0.1)
    assert main(["fit", "--in", str(report), "--loglog"]) == 0
    assert "loglog_power=" in capsys.readouterr().out

    other = tmp_path / "o.csv"
    assert main(["bench", "--config", str(cfg), "--out", str(other)]) == 0
    table = tmp_path / "table.md"
    assert main(["compare", "--in", str(report), "--in", str(other), "--out", str(table)]) == 0
    text = table.read_text()
    assert "greedy [g.csv] L_2" in text and "greedy [o.csv] L_2" in text and lab.FOOTER in text


def test_bad_arguments():
    with pytest.raises(SystemExit):
        main(["kernel", "--type", "nope"])
    with pytest.raises(SystemExit):
        main([])
