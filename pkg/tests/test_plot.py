import re

import pytest

from dmmjump.plot import SchemaError, render


def _polyline_points(svg, cls):
    m = re.search(rf'<polyline class="{cls}" points="([^"]*)"[^>]*stroke-dasharray', svg)
    assert m, f"no dashed {cls} polyline"
    return [tuple(map(float, p.split(","))) for p in m.group(1).split()]


def test_histogram_two_bars_and_determinism():
    text = "bin_center,count\n12.5,3\n37.5,1\n"
    svg = render("histogram", text)
    assert svg.count('<rect class="bar"') == 2
    assert svg.count("<rect") == 2
    assert render("histogram", text) == svg
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")


def test_histogram_with_fit_curve():
    svg = render("histogram", "bin_center,count,fitted_value\n0.5,10,9.5\n1.5,5,5.2\n2.5,2,2.8\n")
    assert 'class="fit"' in svg


def test_sweep_model_curve_matches_formula():
    text = ("v_thr,v_jump,n,nmtts,model_curve\n"
            "0.2,0.42,100,0.8,0.79\n0.6,1.26,100,0.5,0.37\n0.98,2.058,100,0.3,\n")
    svg = render("sweep", text)
    pts = _polyline_points(svg, "model")
    assert len(pts) == 2
    # y pixels decrease linearly with the model value: check the slope against 1 - v_jump/2
    (x1, y1), (x2, y2) = pts
    m1, m2 = 1 - 0.42 / 2, 1 - 1.26 / 2
    assert (y2 - y1) / (m2 - m1) < 0
    assert "1 - V_jump/2" in svg


def test_trajectory_and_scaling():
    traj = render("trajectory", "t,v1,v2\n0,1,-1\n0.05,0.5,-0.2\n0.1,-0.3,0.4\n")
    assert traj.count('class="series"') == 2
    sc = render("scaling", "n,median_base,median_mod\n100,5,4\n200,7,5\n400,10,6\n")
    assert sc.count('class="series"') == 2 and "with jumps" in sc


@pytest.mark.parametrize("kind", ["histogram", "trajectory", "sweep", "scaling"])
def test_schema_errors(kind):
    with pytest.raises(SchemaError):
        render(kind, "foo,bar\n1,2\n")


def test_unknown_kind():
    with pytest.raises(ValueError):
        render("pie", "a\n1\n")
