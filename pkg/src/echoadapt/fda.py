"""Low-frequency magnitude transplant between grayscale images.

The adaptation keeps the source image's full phase spectrum and replaces
the magnitude of its lowest spatial frequencies with the target image's,
selected by a centered binary mask whose half-width is the fraction
``alpha`` of the normalized frequency range. Everything here is pure and
deterministic; batch calls may run in parallel without coordination.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ManifestError, ParameterError, ShapeMismatchError, SpectralInconsistencyError
from .spectral import (
    Image2D,
    MagPhase,
    Spectrum2D,
    forward_dft,
    inverse_dft,
    recombine,
    shift_dc,
    split_mag_phase,
    unshift_dc,
)

__all__ = [
    "LowFreqMask",
    "FdaParams",
    "build_mask",
    "adapt",
    "adapt_raw",
    "adapt_with_mask",
    "adapt_batch",
    "apply_range_policy",
]

RANGE_POLICIES = ("clip", "rescale")


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0) or not np.isfinite(alpha):
        raise ParameterError(f"alpha must lie strictly inside (0, 1), got {alpha}")
    return alpha


@dataclass(frozen=True)
class FdaParams:
    """Adaptation parameters: mask half-width and output range policy."""

    alpha: float = 0.014
    output_range_policy: str = "clip"

    def __post_init__(self):
        _check_alpha(self.alpha)
        if self.output_range_policy not in RANGE_POLICIES:
            raise ParameterError(
                f"output_range_policy must be one of {RANGE_POLICIES}, got {self.output_range_policy!r}"
            )


@dataclass(frozen=True)
class LowFreqMask:
    """Binary W x H mask in centered coordinates selecting the bins where
    ``-alpha < 2*w/W - 1 < alpha`` and ``-alpha < 2*h/H - 1 < alpha``
    (strict inequalities). Nonzero entries form one axis-aligned rectangle
    around the center; the mask grows monotonically with alpha."""

    width: int
    height: int
    alpha: float
    data: np.ndarray = field(repr=False)

    @property
    def count(self) -> int:
        return int(self.data.sum())


def _axis_selector(n: int, alpha: float) -> np.ndarray:
    coords = 2.0 * np.arange(n) / n - 1.0
    return (-alpha < coords) & (coords < alpha)


def build_mask(width: int, height: int, alpha: float) -> LowFreqMask:
    """Construct the centered low-frequency selection mask."""
    alpha = _check_alpha(alpha)
    if width < 1 or height < 1:
        raise ParameterError(f"mask dimensions must be >= 1, got {width}x{height}")
    rows = _axis_selector(width, alpha)
    cols = _axis_selector(height, alpha)
    data = np.outer(rows, cols).astype(np.uint8)
    data.setflags(write=False)
    return LowFreqMask(width=width, height=height, alpha=alpha, data=data)


def _point_reflect(arr: np.ndarray) -> np.ndarray:
    # arr[(-m) % W, (-n) % H] for corner-DC frequency indexing
    return np.roll(arr[::-1, ::-1], (1, 1), axis=(0, 1))


def adapt_with_mask(source: Image2D, target: Image2D, mask: np.ndarray) -> Image2D:
    """Transplant target magnitude onto the source where ``mask`` is 1.

    ``mask`` is a binary array in centered coordinates with the images'
    shape. The returned image is the raw inverse transform, without any
    range policy applied. If the masked swap breaks the conjugate symmetry
    needed for a real inverse (possible for masks not symmetric about the
    center), the swapped magnitude is symmetrized by averaging with its
    point reflection and the inverse is retried.
    """
    if source.shape != target.shape:
        raise ShapeMismatchError(f"source shape {source.shape} != target shape {target.shape}")
    mask = np.asarray(mask)
    if mask.shape != source.shape:
        raise ShapeMismatchError(f"mask shape {mask.shape} != image shape {source.shape}")
    mask = mask.astype(np.float64)

    src_spec = forward_dft(source)
    src_centered = shift_dc(src_spec)
    tgt_centered = shift_dc(forward_dft(target))
    src_polar = split_mag_phase(src_centered)
    tgt_mag = np.abs(tgt_centered.data)

    swapped = mask * tgt_mag + (1.0 - mask) * src_polar.magnitude
    combined = unshift_dc(recombine(MagPhase(swapped, src_polar.phase), dc_position="centered"))
    try:
        return inverse_dft(combined)
    except SpectralInconsistencyError:
        # The source phase plane is reused directly: zero-magnitude bins can
        # gain weight from their reflection, so the phase recovered from the
        # combined spectrum (0 at such bins) would stay asymmetric.
        corner_mag = np.abs(combined.data)
        corner_phase = split_mag_phase(src_spec).phase
        symmetrized = 0.5 * (corner_mag + _point_reflect(corner_mag))
        return inverse_dft(recombine(MagPhase(symmetrized, corner_phase)))


def adapt_raw(source: Image2D, target: Image2D, alpha: float = 0.014) -> Image2D:
    """Low-frequency adaptation without the output range policy."""
    mask = build_mask(source.width, source.height, alpha)
    return adapt_with_mask(source, target, mask.data)


def apply_range_policy(img: Image2D, policy: str) -> Image2D:
    """Force image values into [0, 1] by clipping or min-max rescaling."""
    if policy not in RANGE_POLICIES:
        raise ParameterError(f"unknown range policy {policy!r}")
    data = img.data
    if policy == "rescale":
        lo = float(data.min())
        hi = float(data.max())
        if hi > lo:
            return Image2D((data - lo) / (hi - lo))
    return Image2D(np.clip(data, 0.0, 1.0))


def adapt(source: Image2D, target: Image2D, params: FdaParams = FdaParams()) -> Image2D:
    """Adapt ``source`` toward ``target`` and return an image in [0, 1]."""
    return apply_range_policy(adapt_raw(source, target, params.alpha), params.output_range_policy)


def adapt_batch(
    sources: Sequence[Image2D],
    targets: Sequence[Image2D],
    pairing: Sequence[int],
    params: FdaParams = FdaParams(),
    jobs: int = 1,
) -> list[Image2D]:
    """Adapt each source against ``targets[pairing[i]]``.

    ``pairing`` maps source index to target index and must cover every
    source. Output order follows input order and is independent of the
    parallelism degree.
    """
    sources = list(sources)
    targets = list(targets)
    pairing = list(pairing)
    if len(pairing) != len(sources):
        raise ManifestError(f"pairing covers {len(pairing)} sources, expected {len(sources)}")
    for i, j in enumerate(pairing):
        if not (0 <= int(j) < len(targets)):
            raise ManifestError(f"pairing index {j} for source {i} is outside [0, {len(targets)})")
    if not sources:
        return []

    def one(i: int) -> Image2D:
        return adapt(sources[i], targets[int(pairing[i])], params)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, range(len(sources))))
    return [one(i) for i in range(len(sources))]
