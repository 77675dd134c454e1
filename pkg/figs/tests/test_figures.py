import os

import matplotlib.pyplot as plt
import pytest
from matplotlib.colors import to_rgba
from matplotlib.figure import Figure

from epgrav_figs.errors import FigsError, MissingColumn
from epgrav_figs.figures import (BRANCH_MINUS_COLOR, BRANCH_PLUS_COLOR,
                                 FIGURE_IDS, FigureSpec, build_figure, render)


def spec_for(fig_dir, tmp_path, figure):
    return FigureSpec(figure=figure, in_dir=str(fig_dir),
                      out_path=str(tmp_path / f"fig{figure}.png"))


def test_unknown_figure_id_rejected(tmp_path):
    with pytest.raises(FigsError):
        FigureSpec(figure=3, in_dir=".", out_path=str(tmp_path / "x.png"))


def test_input_paths_per_figure(fig_dir, tmp_path):
    spec = spec_for(fig_dir, tmp_path, 4)
    names = [os.path.basename(p) for p in spec.input_paths()]
    assert names == ["fig4_X.csv", "fig4_Y.csv", "fig4_Z.csv"]


@pytest.mark.parametrize("figure", FIGURE_IDS)
def test_build_returns_figure(fig_dir, tmp_path, figure):
    fig = build_figure(spec_for(fig_dir, tmp_path, figure))
    try:
        assert isinstance(fig, Figure)
        assert fig.axes
        for ax in fig.axes:
            assert ax.get_lines() or ax.patches
    finally:
        plt.close(fig)


def test_branch_colors_black_and_red(fig_dir, tmp_path):
    fig = build_figure(spec_for(fig_dir, tmp_path, 2))
    try:
        for ax in fig.axes:
            labelled = [ln for ln in ax.get_lines() if
                        not ln.get_label().startswith("_")]
            plus, minus = labelled[0], labelled[1]
            assert to_rgba(plus.get_color()) == to_rgba(BRANCH_PLUS_COLOR)
            assert to_rgba(minus.get_color()) == to_rgba(BRANCH_MINUS_COLOR)
    finally:
        plt.close(fig)


def test_shift_figure_has_one_panel_per_case(fig_dir, tmp_path):
    fig = build_figure(spec_for(fig_dir, tmp_path, 4))
    try:
        assert len(fig.axes) == 3
        titles = [ax.get_title() for ax in fig.axes]
        assert titles == ["case X", "case Y", "case Z"]
        # three perturbation strengths, two branches each
        assert len(fig.axes[0].get_lines()) >= 6
    finally:
        plt.close(fig)


def test_gamma_figure_groups_by_case(fig_dir, tmp_path):
    fig = build_figure(spec_for(fig_dir, tmp_path, 5))
    try:
        ax = fig.axes[0]
        labels = {ln.get_label() for ln in ax.get_lines()}
        assert {"case X", "case Y", "case Z"} <= labels
        assert ax.get_xscale() == "log"
    finally:
        plt.close(fig)


def test_g_figure_shades_reference_interval(fig_dir, tmp_path):
    fig = build_figure(spec_for(fig_dir, tmp_path, 6))
    try:
        assert len(fig.axes[0].get_lines()) == 3  # one curve per density
        spans = fig.axes[1].patches
        assert spans, "reference interval band missing"
        x0, x1 = spans[0].get_x(), spans[0].get_x() + spans[0].get_width()
        assert x0 == pytest.approx(6.67408e-11 - 0.00031e-11)
        assert x1 == pytest.approx(6.67408e-11 + 0.00031e-11)
    finally:
        plt.close(fig)


@pytest.mark.parametrize("figure", FIGURE_IDS)
def test_render_is_byte_deterministic(fig_dir, tmp_path, figure):
    a = FigureSpec(figure=figure, in_dir=str(fig_dir),
                   out_path=str(tmp_path / "a.png"))
    b = FigureSpec(figure=figure, in_dir=str(fig_dir),
                   out_path=str(tmp_path / "b.png"))
    render(a)
    render(b)
    assert (tmp_path / "a.png").read_bytes() == (tmp_path / "b.png").read_bytes()


def test_missing_input_file_reported(tmp_path):
    spec = FigureSpec(figure=2, in_dir=str(tmp_path),
                      out_path=str(tmp_path / "out.png"))
    with pytest.raises(FigsError, match="fig2_X.csv"):
        build_figure(spec)


def test_missing_column_reported(fig_dir, tmp_path):
    broken = tmp_path / "data"
    broken.mkdir()
    text = (fig_dir / "fig2_X.csv").read_text()
    text = text.replace("nu_minus", "nu_other")
    (broken / "fig2_X.csv").write_text(text)
    spec = FigureSpec(figure=2, in_dir=str(broken),
                      out_path=str(tmp_path / "out.png"))
    with pytest.raises(MissingColumn, match="nu_minus"):
        build_figure(spec)


def test_missing_interval_comment_reported(fig_dir, tmp_path):
    broken = tmp_path / "data"
    broken.mkdir()
    lines = [ln for ln in (fig_dir / "fig6.csv").read_text().splitlines()
             if "codata_interval" not in ln]
    (broken / "fig6.csv").write_text("\n".join(lines) + "\n")
    spec = FigureSpec(figure=6, in_dir=str(broken),
                      out_path=str(tmp_path / "out.png"))
    with pytest.raises(FigsError, match="codata_interval"):
        build_figure(spec)


def test_render_creates_output_directory(fig_dir, tmp_path):
    out = tmp_path / "nested" / "deep" / "fig5.png"
    spec = FigureSpec(figure=5, in_dir=str(fig_dir), out_path=str(out))
    assert render(spec) == str(out)
    assert out.stat().st_size > 0
