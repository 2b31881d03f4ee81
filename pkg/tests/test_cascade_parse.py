"""Cascade XML dialect: parsing, rejection, round trips."""

import pytest

from attentive.facegate.cascade import (
    CascadeFormatError,
    load_cascade,
    parse_cascade,
    reference_cascade_path,
    serialize_cascade,
)

MINIMAL = """<?xml version="1.0"?>
<opencv_storage>
<test_cascade type_id="opencv-haar-classifier">
  <size>24 24</size>
  <stages>
    <_>
      <trees>
        <_>
          <_>
            <feature>
              <rects>
                <_>0 0 24 12 -1.</_>
                <_>0 12 24 12 1.</_>
              </rects>
              <tilted>0</tilted>
            </feature>
            <threshold>0.05</threshold>
            <left_val>-1.</left_val>
            <right_val>1.</right_val>
          </_>
        </_>
      </trees>
      <stage_threshold>0.5</stage_threshold>
    </_>
  </stages>
</test_cascade>
</opencv_storage>
"""


def test_minimal_one_stage_one_stump():
    c = parse_cascade(MINIMAL)
    assert len(c.stages) == 1
    assert len(c.stages[0].weak) == 1
    stump = c.stages[0].weak[0]
    assert stump.feature.rects == ((0, 0, 24, 12, -1.0), (0, 12, 24, 12, 1.0))
    assert stump.threshold == 0.05
    assert (stump.left_value, stump.right_value) == (-1.0, 1.0)
    assert c.stages[0].stage_threshold == 0.5


def test_reference_cascade_header():
    c = load_cascade(reference_cascade_path())
    assert c.base_width == 24
    assert c.base_height == 24
    assert len(c.stages) >= 2
    assert all(stage.weak for stage in c.stages)


def test_missing_threshold_names_stage():
    with pytest.raises(CascadeFormatError, match="stage 0"):
        parse_cascade(MINIMAL.replace("<threshold>0.05</threshold>", ""))


def test_malformed_xml_reports_line():
    broken = MINIMAL.replace("</stages>", "")
    with pytest.raises(CascadeFormatError, match="line"):
        parse_cascade(broken)


def test_tree_dialect_rejected():
    tree = MINIMAL.replace(
        "<right_val>1.</right_val>",
        "<right_node>1</right_node>",
    )
    with pytest.raises(CascadeFormatError, match="deep-tree"):
        parse_cascade(tree)


def test_rect_outside_base_window_rejected():
    bad = MINIMAL.replace("<_>0 12 24 12 1.</_>", "<_>0 12 24 13 1.</_>")
    with pytest.raises(CascadeFormatError, match="outside"):
        parse_cascade(bad)


def test_feature_rect_count_enforced():
    bad = MINIMAL.replace("<_>0 12 24 12 1.</_>", "")
    with pytest.raises(CascadeFormatError, match="2 or 3 rects"):
        parse_cascade(bad)


def test_serialize_parse_round_trip():
    c = load_cascade(reference_cascade_path())
    assert parse_cascade(serialize_cascade(c)) == c


def test_weights_preserved_exactly():
    c = parse_cascade(MINIMAL.replace("1.</_>", "2.5</_>"))
    assert c.stages[0].weak[0].feature.rects[1][4] == 2.5
