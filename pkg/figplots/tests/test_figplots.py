"""The renderer against fixture CSVs written the way the simulator writes them."""
import os

import pytest

from figplots import PlotSpec, SchemaError, load_table, main, render

import matplotlib.pyplot as plt


FIG1_HEADER = "delta,mean_regret,stderr,bound\n"
FIG23_HEADER = "algo,t,mean_cum_regret,stderr\n"


def write_fig1(path, rows=21):
    lines = [FIG1_HEADER]
    for n in range(rows):
        d = 0.05 * n
        lines.append(f"{d:.9g},{0.4 * d:.9g},{0.01:.9g},{d + 1:.9g}\n")
    path.write_text("".join(lines))


def write_fig23(path, algos=("etc", "ae", "nue", "tsallis"), ticks=5):
    lines = [FIG23_HEADER]
    for a_idx, algo in enumerate(algos):
        for n in range(1, ticks + 1):
            lines.append(f"{algo},{100 * n},{(a_idx + 1) * 10.0 * n:.9g},{0.5:.9g}\n")
    path.write_text("".join(lines))


def test_fig1_renders_two_series(tmp_path):
    src = tmp_path / "fig1.csv"
    write_fig1(src)
    out = tmp_path / "fig1.png"
    fig = render(PlotSpec(str(src), "fig1", str(out)))
    try:
        ax = fig.axes[0]
        assert len(ax.lines) == 2
        assert [ln.get_label() for ln in ax.lines] == ["mean_regret", "bound"]
    finally:
        plt.close(fig)
    assert out.exists() and out.stat().st_size > 0


def test_fig1_bound_series_above_mean(tmp_path):
    src = tmp_path / "fig1.csv"
    write_fig1(src)
    out = tmp_path / "fig1.png"
    fig = render(PlotSpec(str(src), "fig1", str(out)))
    try:
        mean_line, bound_line = fig.axes[0].lines
        for m, b in zip(mean_line.get_ydata(), bound_line.get_ydata()):
            assert b >= m
    finally:
        plt.close(fig)


def test_fig23_renders_one_series_per_algo(tmp_path):
    src = tmp_path / "fig23.csv"
    write_fig23(src)
    out = tmp_path / "fig23.png"
    fig = render(PlotSpec(str(src), "fig23", str(out), band=True))
    try:
        ax = fig.axes[0]
        assert len(ax.lines) == 4
        legend_texts = [t.get_text() for t in ax.get_legend().get_texts()]
        assert legend_texts == ["etc", "ae", "nue", "tsallis"]
    finally:
        plt.close(fig)
    assert out.exists()


def test_missing_column_names_it(tmp_path):
    src = tmp_path / "bad.csv"
    src.write_text("delta,mean_regret,stderr\n0.1,0.2,0.01\n")
    with pytest.raises(SchemaError, match="bound"):
        load_table(str(src), "fig1")


def test_bad_cell_names_column(tmp_path):
    src = tmp_path / "bad.csv"
    src.write_text(FIG1_HEADER + "0.1,oops,0.01,1.0\n")
    with pytest.raises(SchemaError, match="mean_regret"):
        load_table(str(src), "fig1")


def test_kind_must_match_schema(tmp_path):
    src = tmp_path / "fig23.csv"
    write_fig23(src)
    with pytest.raises(SchemaError, match="delta"):
        load_table(str(src), "fig1")


def test_empty_data_writes_no_file(tmp_path):
    src = tmp_path / "empty.csv"
    src.write_text(FIG1_HEADER)
    out = tmp_path / "never.png"
    rc = main(["fig1", str(src), str(out)])
    assert rc == 2
    assert not out.exists()


def test_cli_success_and_flags(tmp_path):
    src = tmp_path / "fig1.csv"
    write_fig1(src)
    out = tmp_path / "fig1.png"
    assert main(["fig1", str(src), str(out), "--log", "--band"]) == 0
    assert out.exists()


def test_cli_schema_error_exits_nonzero(tmp_path, capsys):
    src = tmp_path / "bad.csv"
    src.write_text("x,y\n1,2\n")
    out = tmp_path / "never.png"
    assert main(["fig1", str(src), str(out)]) == 2
    assert "delta" in capsys.readouterr().err
    assert not out.exists()


def test_cli_missing_file_exits_nonzero(tmp_path):
    assert main(["fig1", str(tmp_path / "nope.csv"), str(tmp_path / "o.png")]) == 2


def test_cli_bad_kind_exits_nonzero(tmp_path):
    src = tmp_path / "fig1.csv"
    write_fig1(src)
    assert main(["fig9", str(src), str(tmp_path / "o.png")]) == 2


def test_input_untouched_and_output_deterministic(tmp_path):
    src = tmp_path / "fig23.csv"
    write_fig23(src)
    before = src.read_bytes()
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    assert main(["fig23", str(src), str(a), "--band"]) == 0
    assert main(["fig23", str(src), str(b), "--band"]) == 0
    assert src.read_bytes() == before
    assert a.read_bytes() == b.read_bytes()


def test_single_algo_single_row(tmp_path):
    src = tmp_path / "one.csv"
    src.write_text(FIG23_HEADER + "ae,100,3.5,0.1\n")
    out = tmp_path / "one.png"
    fig = render(PlotSpec(str(src), "fig23", str(out)))
    try:
        assert len(fig.axes[0].lines) == 1
    finally:
        plt.close(fig)
