"""Face-gated frame preprocessing.

Raw frames come in as 8-bit grayscale arrays (PGM/PPM/raw ingestion in
:mod:`attentive.facegate.images`), are scanned by a from-scratch
stump-cascade evaluator, and leave as normalized 64x64 float grids ready
for the classifier.  Frames without a detectable face are gated out.
"""

from attentive.facegate.images import (
    FACE_SIZE,
    bilinear_resize,
    read_pgm,
    read_ppm,
    rgb_to_gray,
    write_pgm,
)
from attentive.facegate.cascade import (
    Cascade,
    CascadeFormatError,
    CascadeStage,
    HaarFeature,
    WeakClassifier,
    load_cascade,
    parse_cascade,
    reference_cascade_path,
)
from attentive.facegate.integral import IntegralImage, compute_integral
from attentive.facegate.detector import (
    DetectionBox,
    DetectParams,
    detect_faces,
    evaluate_window,
    extract_and_normalize,
    gate_frame,
)
from attentive.facegate.synthetic import synthetic_face_image

__all__ = [
    "FACE_SIZE",
    "Cascade",
    "CascadeFormatError",
    "CascadeStage",
    "DetectionBox",
    "DetectParams",
    "HaarFeature",
    "IntegralImage",
    "WeakClassifier",
    "bilinear_resize",
    "compute_integral",
    "detect_faces",
    "evaluate_window",
    "extract_and_normalize",
    "gate_frame",
    "load_cascade",
    "parse_cascade",
    "read_pgm",
    "read_ppm",
    "reference_cascade_path",
    "rgb_to_gray",
    "synthetic_face_image",
    "write_pgm",
]
