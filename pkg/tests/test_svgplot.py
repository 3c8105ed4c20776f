import xml.etree.ElementTree as ET

from stallguard.svgplot import line_chart


def test_line_chart_is_valid_svg_with_legend():
    svg = line_chart({"a": ([1, 2, 3], [1.0, 0.1, 0.01]), "b<&>": ([1, 2], [0.5, 0.5])},
                     title="t", log_y=True)
    root = ET.fromstring(svg)
    ns = "{http://www.w3.org/2000/svg}"
    assert len(root.findall(f"{ns}polyline")) == 2
    texts = [t.text for t in root.iter(f"{ns}text")]
    assert "b<&>" in texts and "1e-2" in texts


def test_log_y_drops_non_positive_and_is_pure():
    s = {"a": ([0, 1, 2], [0.0, 1.0, 2.0])}
    svg = line_chart(s, log_y=True)
    assert svg == line_chart(s, log_y=True)
    pts = ET.fromstring(svg).find("{http://www.w3.org/2000/svg}polyline").get("points").split()
    assert len(pts) == 2


def test_degenerate_series():
    ET.fromstring(line_chart({"flat": ([1], [3.0])}))
    ET.fromstring(line_chart({}))
