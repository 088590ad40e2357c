import json
import xml.etree.ElementTree as ET

import numpy as np

from midkit import svg


def parse(doc: str) -> ET.Element:
    return ET.fromstring(doc)


def plot_groups(root):
    return [g for g in root.iter("{http://www.w3.org/2000/svg}g") if g.get("class") == "plot"]


def test_line_document_valid_xml_with_metadata():
    x = np.linspace(0, 1, 20)
    panel = svg.line_panel("p1", "demo", x, [("a", np.sin(x)), ("b", np.cos(x))], "x", "y")
    doc = svg.render_document([panel], {"tool": "midkit"})
    root = parse(doc)
    meta = root.find("{http://www.w3.org/2000/svg}metadata")
    assert json.loads(meta.text)["tool"] == "midkit"
    assert len(plot_groups(root)) == 1


def test_one_plot_group_per_panel():
    x = np.linspace(0, 1, 5)
    panels = [
        svg.line_panel(f"t{i}", f"term {i}", x, [("", x * i)]) for i in range(3)
    ]
    root = parse(svg.render_document(panels, {}))
    groups = plot_groups(root)
    assert len(groups) == 3
    assert {g.get("id") for g in groups} == {"t0", "t1", "t2"}


def test_heatmap_escapes_labels():
    z = np.arange(6, dtype=float).reshape(2, 3)
    panel = svg.heatmap_panel("h", 'a<b & "c"', ["u<1", "v", "w"], ["r&1", "r2"], z)
    root = parse(svg.render_document([panel], {}))
    assert len(plot_groups(root)) == 1


def test_bar_and_waterfall_render():
    bar = svg.bar_panel("b", "bars", ["aa", "bb"], [1.5, -0.5])
    wf = svg.waterfall_panel("w", "steps", ["t1", "t2"], [1.0, 2.0, 1.2])
    root = parse(svg.render_document([bar, wf], {"k": 1}))
    assert len(plot_groups(root)) == 2


def test_degenerate_ranges_still_render():
    x = np.array([1.0, 1.0, 1.0])
    panel = svg.line_panel("flat", "flat", x, [("", np.zeros(3))])
    parse(svg.render_document([panel], {}))
