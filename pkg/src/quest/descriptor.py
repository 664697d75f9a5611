"""QUEST senary code maps and the classic 8-neighbour LBP baseline.

Neighbour ``k`` of a pixel sits at 45*k degrees counter-clockwise from east,
with image rows growing downwards::

    I3 I2 I1
    I4 Ic I0
    I5 I6 I7

Each QUEST bit ``v`` (0..5) averages two ring neighbours picked by
quadrilateral ``omega`` and compares the average to the centre. Bits 4 and 5
divide the pair sum by 4 instead of 2. The 1-pixel image border is not coded.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ImageSizeError
from .imageio import GrayImage

P = 8
QUEST_BITS = P - 2
QUEST_RANGE = 1 << QUEST_BITS
LBP_RANGE = 1 << P

# (dx, dy) for I_0..I_7
NEIGHBOR_OFFSETS = ((1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1))

QUAD_RULES = {
    "v3": lambda v: v // 3,
    "v4": lambda v: v // 4,
    "alt": lambda v: v % 2,
}


@dataclass(frozen=True)
class QuestConfig:
    quad_assignment: str = "v3"
    p: int = P

    def __post_init__(self):
        if self.p != P:
            raise ValueError(f"only an 8-pixel neighbourhood is supported, got p={self.p}")
        if self.quad_assignment not in QUAD_RULES:
            raise ValueError(
                f"unknown quad assignment {self.quad_assignment!r}; choose from {sorted(QUAD_RULES)}")

    def omega(self, v: int) -> int:
        return QUAD_RULES[self.quad_assignment](v)


@dataclass(frozen=True)
class CodeMap:
    codes: np.ndarray
    code_range: int
    descriptor_id: str
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        arr = np.asarray(self.codes)
        arr = arr.astype(np.uint8 if self.code_range <= 256 else np.int64)
        arr.setflags(write=False)
        object.__setattr__(self, "codes", arr)

    @property
    def width(self) -> int:
        return self.codes.shape[1]

    @property
    def height(self) -> int:
        return self.codes.shape[0]

    def __eq__(self, other):
        if not isinstance(other, CodeMap):
            return NotImplemented
        return (self.code_range == other.code_range
                and self.descriptor_id == other.descriptor_id
                and np.array_equal(self.codes, other.codes))

    __hash__ = None

    def to_pgm_pixels(self, visualize: bool = False) -> np.ndarray:
        """8-bit export; ``visualize`` stretches QUEST codes by 4 for display."""
        codes = self.codes.astype(np.int64)
        if visualize and self.descriptor_id == "QUEST":
            codes = codes * 4
        return codes.astype(np.uint8)


def psi(eta: int, p: int = P) -> int:
    return (eta // 4) * (p - 2)


def _pair_indices(v: int, omega: int, p: int = P) -> tuple[int, int, int]:
    s = psi(v, p)
    return (2 * v - omega + s) % p, (2 * (v - omega + 1)) % p, s // 3 + 2


def quad_sample(neighbors, v: int, omega: int, p: int = P) -> float:
    """Average of the neighbour pair selected by bit ``v`` in quadrilateral ``omega``."""
    i, j, div = _pair_indices(v, omega, p)
    return (float(neighbors[i]) + float(neighbors[j])) / div


def ring(patch) -> list[int]:
    """I_0..I_7 of a 3x3 patch given as rows."""
    patch = np.asarray(patch)
    return [int(patch[1 + dy, 1 + dx]) for dx, dy in NEIGHBOR_OFFSETS]


def quest_encode_pixel(patch, cfg: QuestConfig | None = None) -> int:
    cfg = cfg or QuestConfig()
    patch = np.asarray(patch)
    if patch.shape != (3, 3):
        raise ImageSizeError(f"expected a 3x3 patch, got shape {patch.shape}")
    nb = ring(patch)
    center = float(patch[1, 1])
    code = 0
    for v in range(QUEST_BITS):
        if quad_sample(nb, v, cfg.omega(v)) - center >= 0:
            code |= 1 << v
    return code


def _check_size(img: GrayImage) -> None:
    if img.width < 3 or img.height < 3:
        raise ImageSizeError(f"need at least a 3x3 image, got {img.width}x{img.height}")


def _neighbor_planes(a: np.ndarray) -> list[np.ndarray]:
    h, w = a.shape
    return [a[1 + dy:h - 1 + dy, 1 + dx:w - 1 + dx] for dx, dy in NEIGHBOR_OFFSETS]


def quest_encode_map(img: GrayImage, cfg: QuestConfig | None = None) -> CodeMap:
    cfg = cfg or QuestConfig()
    _check_size(img)
    a = img.pixels.astype(np.int32)
    nb = _neighbor_planes(a)
    center = a[1:-1, 1:-1]
    codes = np.zeros(center.shape, dtype=np.uint8)
    for v in range(QUEST_BITS):
        i, j, div = _pair_indices(v, cfg.omega(v))
        # (I_i + I_j) / div >= Ic, kept in integers so the comparison is exact
        bit = (nb[i] + nb[j]) >= div * center
        codes |= bit.astype(np.uint8) << v
    return CodeMap(codes, QUEST_RANGE, "QUEST", {"quad_assignment": cfg.quad_assignment})


def lbp_encode_map(img: GrayImage) -> CodeMap:
    _check_size(img)
    a = img.pixels.astype(np.int32)
    center = a[1:-1, 1:-1]
    codes = np.zeros(center.shape, dtype=np.uint8)
    for k, plane in enumerate(_neighbor_planes(a)):
        codes |= (plane >= center).astype(np.uint8) << k
    return CodeMap(codes, LBP_RANGE, "LBP")


def encode_map(img: GrayImage, descriptor: str = "quest", cfg: QuestConfig | None = None) -> CodeMap:
    descriptor = descriptor.lower()
    if descriptor == "quest":
        return quest_encode_map(img, cfg)
    if descriptor == "lbp":
        return lbp_encode_map(img)
    raise ValueError(f"unknown descriptor {descriptor!r}")
