"""SVG chart emission. Every chart embeds its data for spot-checking."""

import xml.etree.ElementTree as etree

import pytest

from singulab.errors import InputError
from singulab.plotting import LineSeries, chart_data, heatmap, line_chart, write_svg


def test_line_chart_is_valid_xml_and_carries_its_data():
    series = [
        LineSeries("alpha+beta", [100, 300, 1000], [1.0, 0.99, 1.01]),
        LineSeries("floor", [100, 300, 1000], [0.05, 0.05, 0.05]),
    ]
    svg = line_chart(series, title="error sums", xlabel="n", ylabel="sum", log_x=True)
    root = etree.fromstring(svg)
    assert root.tag.endswith("svg")
    data = chart_data(svg)
    assert data["title"] == "error sums"
    assert data["series"][0]["label"] == "alpha+beta"
    assert data["series"][0]["y"] == [1.0, 0.99, 1.01]


def test_heatmap_embeds_matrix_and_overlays():
    values = [[0.1, 0.5], [0.9, 1.0]]
    svg = heatmap(
        values,
        row_labels=["n=100", "n=300"],
        col_labels=["d=0.1", "d=0.2"],
        title="power",
        xlabel="delta",
        ylabel="n",
        overlays=[("boundary", [(0.5, 0.0), (1.5, 2.0)])],
    )
    etree.fromstring(svg)
    data = chart_data(svg)
    assert data["values"] == values
    assert data["overlays"][0]["label"] == "boundary"


def test_mismatched_series_lengths_rejected():
    with pytest.raises(InputError):
        LineSeries("bad", [1, 2, 3], [1.0])


def test_heatmap_shape_validation():
    with pytest.raises(InputError):
        heatmap(
            [[0.1, 0.2], [0.3]],
            row_labels=["a", "b"],
            col_labels=["x", "y"],
            title="t",
            xlabel="x",
            ylabel="y",
        )
    with pytest.raises(InputError):
        heatmap(
            [[0.1]], row_labels=["a", "b"], col_labels=["x"],
            title="t", xlabel="x", ylabel="y",
        )


def test_write_svg_round_trip(tmp_path):
    series = [LineSeries("s", [1, 2], [3.0, 4.0])]
    svg = line_chart(series, title="t", xlabel="x", ylabel="y")
    path = tmp_path / "plot.svg"
    write_svg(path, svg)
    text = path.read_text()
    assert chart_data(text)["series"][0]["y"] == [3.0, 4.0]


def test_log_axis_rejects_nonpositive_values():
    series = [LineSeries("s", [0, 10], [1.0, 2.0])]
    with pytest.raises(InputError):
        line_chart(series, title="t", xlabel="x", ylabel="y", log_x=True)


def test_charts_are_deterministic():
    series = [LineSeries("s", [1, 2, 3], [0.2, 0.4, 0.1])]
    a = line_chart(series, title="t", xlabel="x", ylabel="y")
    b = line_chart(series, title="t", xlabel="x", ylabel="y")
    assert a == b
