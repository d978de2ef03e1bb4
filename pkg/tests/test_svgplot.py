"""SVG plotter tests: well-formedness, determinism, content markers."""

import xml.etree.ElementTree as ET

import numpy as np

from vfo.svgplot import histogram_plot, line_plot

SERIES = [{"label": "a", "x": [0.0, 1.0, 2.0], "y": [0.1, 0.4, 0.2],
           "yerr": [0.05, 0.1, 0.0]},
          {"label": "b", "x": [0.0, 1.0, 2.0], "y": [0.3, 0.2, 0.5]}]


def test_line_plot_is_valid_xml():
    svg = line_plot(SERIES, "title text", "xlab", "ylab", hline=0.0)
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")
    text = ET.tostring(root, encoding="unicode")
    for marker in ("title text", "xlab", "ylab", "a", "b"):
        assert marker in text


def test_line_plot_deterministic():
    a = line_plot(SERIES, "t", "x", "y", hline=0.0)
    b = line_plot(SERIES, "t", "x", "y", hline=0.0)
    assert a == b
    c = line_plot(SERIES, "t", "x", "y", hline=0.5)
    assert a != c


def test_line_plot_single_point_series():
    svg = line_plot([{"label": "p", "x": [1.0], "y": [2.0]}], "t", "x", "y")
    ET.fromstring(svg)


def test_line_plot_unsorted_x_is_sorted():
    svg = line_plot([{"label": "p", "x": [2.0, 0.0, 1.0],
                      "y": [4.0, 0.0, 1.0]}], "t", "x", "y")
    a = svg.index("polyline")
    seg = svg[a:svg.index("/>", a)]
    # the polyline x coordinates must be non-decreasing after sorting
    pts = [tuple(map(float, p.split(","))) for p in
           seg.split('points="')[1].split('"')[0].split()]
    assert all(p1[0] <= p2[0] for p1, p2 in zip(pts, pts[1:]))


def test_histogram_plot_valid_and_deterministic():
    edges = np.linspace(0.0, 1.0, 6)
    counts = np.array([1, 4, 0, 2, 3])
    a = histogram_plot(edges, counts, "hist", "val")
    b = histogram_plot(edges, counts, "hist", "val")
    assert a == b
    root = ET.fromstring(a)
    rects = [el for el in root.iter() if el.tag.endswith("rect")]
    # one background rect plus one bar per bin
    assert len(rects) >= len(counts)


def test_histogram_plot_all_zero_counts():
    edges = np.linspace(0.0, 1.0, 4)
    svg = histogram_plot(edges, np.zeros(3, dtype=int), "empty", "val")
    ET.fromstring(svg)
