"""Motion concepts: one-shot learning and recognition of multimodal human actions.

Demonstrations (motion + held objects + location) are segmented, encoded as
sequences of motion primitives from a shared online-KDE library, and stored
as prototypes in named concepts. Recognition picks the concept with the
lowest motion + context cost and checks a relative novelty margin.
"""

from .concepts import ConceptRegistry, MotionConcept, OmclConfig
from .data_model import Demonstration, EnvironmentCatalog, LocationStream, MotionStream, ObjectStream
from .primitives import PrimitiveLibrary
from .prototype import MotionPrototype, build_prototype
from .recognition import RecognitionDecision, recognize
from .segmentation import SegmentationParams, segment

__version__ = "0.1.0"

__all__ = [
    "ConceptRegistry", "MotionConcept", "OmclConfig", "Demonstration", "EnvironmentCatalog",
    "LocationStream", "MotionStream", "ObjectStream", "PrimitiveLibrary", "MotionPrototype",
    "build_prototype", "RecognitionDecision", "recognize", "SegmentationParams", "segment",
]
