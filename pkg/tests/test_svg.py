import math
import xml.etree.ElementTree as ET

import numpy as np

from macroq.svg import line_chart

NS = "{http://www.w3.org/2000/svg}"


def parse(text):
    return ET.fromstring(text)


def test_valid_document_with_two_series():
    x = np.linspace(0, 1, 11)
    doc = line_chart([("a", x, x**2), ("b", x, 1 - x)], "t & t", "x", "y")
    root = parse(doc)
    assert root.tag == NS + "svg"
    assert len(root.findall(NS + "polyline")) == 2
    assert "t &amp; t" in doc


def test_deterministic():
    x = np.geomspace(1, 1e4, 20)
    args = ([("a", x, 1 / x)], "", "", "", True, True)
    assert line_chart(*args) == line_chart(*args)


def test_log_axes_skip_nonpositive_points():
    x = np.array([1.0, 10.0, 100.0, 1000.0])
    y = np.array([1.0, -1.0, 3.0, 4.0])
    root = parse(line_chart([("a", x, y)], logx=True, logy=True))
    lines = root.findall(NS + "polyline")
    assert [len(l.get("points").split()) for l in lines] == [1, 2]
    labels = {t.text for t in root.findall(NS + "text")}
    assert {"1e0", "1e1", "1e2", "1e3"} <= labels


def test_degenerate_inputs():
    parse(line_chart([("flat", [0, 1], [2, 2])]))
    parse(line_chart([("nan", [0, 1], [math.nan, math.nan])]))
    parse(line_chart([]))
