"""Stump-cascade model and its XML dialect.

The on-disk format is the legacy OpenCV trainer layout: a root storage
element wrapping one classifier with a ``<size>`` header and ``<stages>``,
each stage holding ``<trees>`` whose single ``_`` node carries a
``feature`` (2-3 weighted rects), a ``threshold`` and terminal
``left_val``/``right_val``.  Trees with child nodes (``left_node`` /
``right_node``) are the deep-tree dialect and are rejected.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass
from importlib import resources

import numpy as np


class CascadeFormatError(ValueError):
    """Raised for malformed or unsupported cascade files."""


@dataclass(frozen=True)
class HaarFeature:
    """2 or 3 weighted rectangles in base-window coordinates.

    Each rect is (x, y, w, h, weight); the feature value is the weighted
    sum of the rect pixel sums.
    """

    rects: tuple[tuple[int, int, int, int, float], ...]


@dataclass(frozen=True)
class WeakClassifier:
    """Decision stump: left when value < threshold * window_std, else right.

    The compared value is the feature sum divided by the window area
    (variance normalization divides the threshold side by the window's
    pixel standard deviation).
    """

    feature: HaarFeature
    threshold: float
    left_value: float
    right_value: float


@dataclass(frozen=True)
class CascadeStage:
    weak: tuple[WeakClassifier, ...]
    stage_threshold: float


@dataclass(frozen=True)
class Cascade:
    base_width: int
    base_height: int
    stages: tuple[CascadeStage, ...]


def _required_float(node: ET.Element, tag: str, where: str) -> float:
    child = node.find(tag)
    if child is None or child.text is None:
        raise CascadeFormatError(f"missing <{tag}> in {where}")
    try:
        return float(child.text.strip())
    except ValueError as exc:
        raise CascadeFormatError(f"bad <{tag}> value in {where}") from exc


def _parse_feature(node: ET.Element, where: str, base_w: int, base_h: int) -> HaarFeature:
    feature = node.find("feature")
    if feature is None:
        raise CascadeFormatError(f"missing <feature> in {where}")
    rects_node = feature.find("rects")
    if rects_node is None:
        raise CascadeFormatError(f"missing <rects> in {where}")
    rects = []
    for rect in rects_node.findall("_"):
        parts = (rect.text or "").split()
        if len(parts) != 5:
            raise CascadeFormatError(f"rect needs 5 fields in {where}")
        x, y, w, h = (int(p) for p in parts[:4])
        weight = float(parts[4])
        if x < 0 or y < 0 or w <= 0 or h <= 0 or x + w > base_w or y + h > base_h:
            raise CascadeFormatError(f"rect outside base window in {where}")
        rects.append((x, y, w, h, weight))
    if len(rects) not in (2, 3):
        raise CascadeFormatError(f"feature needs 2 or 3 rects in {where}")
    return HaarFeature(rects=tuple(rects))


def parse_cascade(xml_text: str) -> Cascade:
    """Parse legacy stump-cascade XML into a :class:`Cascade`.

    Raises :class:`CascadeFormatError` with line context for malformed XML
    and for the deep-tree dialect.
    """
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        line, col = exc.position
        raise CascadeFormatError(f"malformed XML at line {line}, column {col}") from exc

    # Root is <opencv_storage>; the classifier is its single child element.
    classifier = root[0] if len(root) else root
    size_node = classifier.find("size")
    if size_node is None or size_node.text is None:
        raise CascadeFormatError("missing <size> header")
    try:
        base_w, base_h = (int(p) for p in size_node.text.split())
    except ValueError as exc:
        raise CascadeFormatError("bad <size> header") from exc
    if base_w <= 0 or base_h <= 0:
        raise CascadeFormatError("base window must be positive")

    stages_node = classifier.find("stages")
    if stages_node is None:
        raise CascadeFormatError("missing <stages>")

    stages = []
    for si, stage_node in enumerate(stages_node.findall("_")):
        where_stage = f"stage {si}"
        trees_node = stage_node.find("trees")
        if trees_node is None:
            raise CascadeFormatError(f"missing <trees> in {where_stage}")
        weak = []
        for ti, tree_node in enumerate(trees_node.findall("_")):
            nodes = tree_node.findall("_")
            if len(nodes) != 1:
                raise CascadeFormatError(
                    f"tree {ti} in {where_stage} has {len(nodes)} nodes; "
                    "only single-stump trees are supported"
                )
            node = nodes[0]
            if node.find("left_node") is not None or node.find("right_node") is not None:
                raise CascadeFormatError(
                    f"tree {ti} in {where_stage} uses the deep-tree dialect "
                    "(left_node/right_node); unsupported"
                )
            where = f"{where_stage}, tree {ti}"
            weak.append(
                WeakClassifier(
                    feature=_parse_feature(node, where, base_w, base_h),
                    threshold=_required_float(node, "threshold", where),
                    left_value=_required_float(node, "left_val", where),
                    right_value=_required_float(node, "right_val", where),
                )
            )
        if not weak:
            raise CascadeFormatError(f"{where_stage} has no trees")
        stages.append(
            CascadeStage(
                weak=tuple(weak),
                stage_threshold=_required_float(stage_node, "stage_threshold", where_stage),
            )
        )
    if not stages:
        raise CascadeFormatError("cascade has no stages")
    return Cascade(base_width=base_w, base_height=base_h, stages=tuple(stages))


def load_cascade(path: str) -> Cascade:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_cascade(fh.read())


def reference_cascade_path() -> str:
    """Path of the vendored frontal-face stump cascade."""
    return str(resources.files("attentive.facegate").joinpath("data/frontalface_stump.xml"))


def serialize_cascade(cascade: Cascade) -> str:
    """Render a Cascade back to the XML dialect (fixture/test aid)."""
    lines = [
        '<?xml version="1.0"?>',
        "<opencv_storage>",
        '<cascade_frontalface type_id="opencv-haar-classifier">',
        f"  <size>{cascade.base_width} {cascade.base_height}</size>",
        "  <stages>",
    ]
    for stage in cascade.stages:
        lines.append("    <_>")
        lines.append("      <trees>")
        for weak in stage.weak:
            lines.append("        <_>")
            lines.append("          <_>")
            lines.append("            <feature>")
            lines.append("              <rects>")
            for x, y, w, h, wt in weak.feature.rects:
                lines.append(f"                <_>{x} {y} {w} {h} {_fmt(wt)}</_>")
            lines.append("              </rects>")
            lines.append("              <tilted>0</tilted>")
            lines.append("            </feature>")
            lines.append(f"            <threshold>{_fmt(weak.threshold)}</threshold>")
            lines.append(f"            <left_val>{_fmt(weak.left_value)}</left_val>")
            lines.append(f"            <right_val>{_fmt(weak.right_value)}</right_val>")
            lines.append("          </_>")
            lines.append("        </_>")
        lines.append("      </trees>")
        lines.append(f"      <stage_threshold>{_fmt(stage.stage_threshold)}</stage_threshold>")
        lines.append("      <parent>-1</parent>")
        lines.append("      <next>-1</next>")
        lines.append("    </_>")
    lines += ["  </stages>", "</cascade_frontalface>", "</opencv_storage>", ""]
    return "\n".join(lines)


def _fmt(value: float) -> str:
    return np.format_float_positional(value, trim="0")
