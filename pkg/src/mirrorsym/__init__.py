"""Reflection symmetry detection via log-Gabor edge features and pair voting."""

__version__ = "0.1.0"

from .config import Config, load_config
from .errors import (MirrorSymError, NoFeaturesError, NoSymmetryEvidenceError,
                     ParameterError, RecordFormatError)
from .evaluation import AxisSegment, EvalReport, evaluate_dataset
from .pipeline import DetectionResult, detect_array, detect_path
from .records import DetectionRecord, GroundTruthRecord

__all__ = [
    "__version__",
    "AxisSegment",
    "Config",
    "DetectionRecord",
    "DetectionResult",
    "EvalReport",
    "GroundTruthRecord",
    "MirrorSymError",
    "NoFeaturesError",
    "NoSymmetryEvidenceError",
    "ParameterError",
    "RecordFormatError",
    "detect_array",
    "detect_path",
    "evaluate_dataset",
    "load_config",
]
