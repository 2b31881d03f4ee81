"""Learner attentiveness analytics toolkit.

Subpackages
-----------
facegate     face detection (stump cascade evaluator) and frame preprocessing
tensornet    minimal dense/conv network engine with focal loss and Adam
affectmodel  the 4-parallel-branch affective-state classifier
datasetio    labeled clip datasets, frame sampling, synthetic generators
attnindex    attentiveness-index evaluation and least-squares refitting
analytics    streaming session analytics, alerts, reports, recommendations
service      multi-session network service (REST + websocket channels)
cli          operator command line
"""

__version__ = "0.1.0"
