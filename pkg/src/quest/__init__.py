"""QUEST quadrilateral senary-bit descriptor with an LBP baseline, region
histogram features and one-vs-one linear SVM evaluation."""

__version__ = "0.1.0"

from .descriptor import CodeMap, QuestConfig, lbp_encode_map, quest_encode_map  # noqa: E402
from .features import FeatureVector, RegionGrid, extract_feature_vector  # noqa: E402
from .imageio import BoundingBox, GrayImage, decode_image, read_image  # noqa: E402

__all__ = [
    "BoundingBox", "CodeMap", "FeatureVector", "GrayImage", "QuestConfig", "RegionGrid",
    "decode_image", "extract_feature_vector", "lbp_encode_map", "quest_encode_map", "read_image",
]
