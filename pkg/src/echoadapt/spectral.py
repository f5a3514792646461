"""Exact 2D discrete Fourier analysis on real-valued images.

Conventions, used consistently by every module in this package:

* Arrays are row-major with shape ``(width, height)``: the first axis is
  indexed by ``w`` (length ``W``), the second by ``h`` (length ``H``).
* The forward transform is unnormalized, ``F(m, n) = sum_w sum_h
  I(w, h) * exp(-2j*pi*(w*m/W + h*n/H))``; the inverse carries the
  ``1/(W*H)`` factor, so ``inverse_dft(forward_dft(img))`` is the identity.
* ``dc_position`` records where the zero-frequency bin sits: ``"corner"``
  for bin ``(0, 0)`` (native FFT layout) or ``"centered"`` for bin
  ``(W//2, H//2)``.
* The phase of a zero-magnitude bin is defined as 0, and phases are kept
  in ``(-pi, pi]``.

Arbitrary (non power-of-two, odd, rectangular) sizes are supported.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError, ParameterError, SpectralInconsistencyError

__all__ = [
    "Image2D",
    "Spectrum2D",
    "MagPhase",
    "forward_dft",
    "inverse_dft",
    "split_mag_phase",
    "recombine",
    "shift_dc",
    "unshift_dc",
]

# Relative factor on max|imag| tolerated when discarding the imaginary part
# of an inverse transform; sized for float64 accumulation at 256x256.
IMAG_RESIDUE_FACTOR = 1e-6

_DC_POSITIONS = ("corner", "centered")


def _first_nonfinite(arr: np.ndarray) -> tuple[int, int]:
    idx = np.argwhere(~np.isfinite(arr))[0]
    return int(idx[0]), int(idx[1])


def _as_2d(data, dtype, what: str) -> np.ndarray:
    arr = np.array(data, dtype=dtype, copy=True)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInputError(f"{what} must be a 2D array with both sides >= 1, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


class Image2D:
    """Real-valued W x H grayscale raster, nominally in [0, 1].

    The nominal range is not enforced (intermediate pipeline images may
    exceed it); finiteness is. Data is copied and frozen on construction,
    so instances are safe to share across threads.
    """

    __slots__ = ("data",)

    def __init__(self, data):
        arr = _as_2d(data, np.float64, "image")
        if not np.all(np.isfinite(arr)):
            w, h = _first_nonfinite(arr)
            raise InvalidInputError(f"non-finite pixel at index ({w}, {h})")
        self.data = arr

    @property
    def width(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def __repr__(self):
        return f"Image2D({self.width}x{self.height})"


class Spectrum2D:
    """Complex-valued W x H frequency plane with a declared DC position."""

    __slots__ = ("data", "dc_position")

    def __init__(self, data, dc_position: str = "corner"):
        if dc_position not in _DC_POSITIONS:
            raise ParameterError(f"dc_position must be one of {_DC_POSITIONS}, got {dc_position!r}")
        arr = _as_2d(data, np.complex128, "spectrum")
        if not np.all(np.isfinite(arr)):
            m, n = _first_nonfinite(arr)
            raise InvalidInputError(f"non-finite bin at index ({m}, {n})")
        self.data = arr
        self.dc_position = dc_position

    @property
    def width(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def __repr__(self):
        return f"Spectrum2D({self.width}x{self.height}, dc={self.dc_position})"


class MagPhase:
    """Polar decomposition of a spectrum: nonnegative magnitude and a
    phase plane in (-pi, pi], with phase 0 at zero-magnitude bins."""

    __slots__ = ("magnitude", "phase")

    def __init__(self, magnitude, phase):
        mag = _as_2d(magnitude, np.float64, "magnitude")
        ph = _as_2d(phase, np.float64, "phase")
        if mag.shape != ph.shape:
            raise InvalidInputError(f"magnitude shape {mag.shape} != phase shape {ph.shape}")
        if not np.all(np.isfinite(mag)):
            raise InvalidInputError("non-finite magnitude value")
        if not np.all(np.isfinite(ph)):
            raise InvalidInputError("non-finite phase value")
        if np.any(mag < 0):
            w, h = [int(v) for v in np.argwhere(mag < 0)[0]]
            raise InvalidInputError(f"negative magnitude at index ({w}, {h})")
        if np.any(ph <= -np.pi) or np.any(ph > np.pi):
            raise InvalidInputError("phase values must lie in (-pi, pi]")
        self.magnitude = mag
        self.phase = ph

    @property
    def shape(self) -> tuple[int, int]:
        return self.magnitude.shape

    def __repr__(self):
        return f"MagPhase({self.shape[0]}x{self.shape[1]})"


def forward_dft(img: Image2D) -> Spectrum2D:
    """Unnormalized forward 2D DFT of a real image; DC lands at the corner."""
    if not np.all(np.isfinite(img.data)):
        w, h = _first_nonfinite(img.data)
        raise InvalidInputError(f"non-finite pixel at index ({w}, {h})")
    return Spectrum2D(np.fft.fft2(img.data), dc_position="corner")


def inverse_dft(spec: Spectrum2D) -> Image2D:
    """Inverse 2D DFT (carries the 1/(W*H) factor), returning a real image.

    The imaginary residue of the inverse is asserted below
    ``IMAG_RESIDUE_FACTOR * (max|real| + 1)`` before being discarded;
    a larger residue raises :class:`SpectralInconsistencyError`.
    """
    if spec.dc_position != "corner":
        raise ParameterError("inverse_dft expects a corner-DC spectrum; call unshift_dc first")
    z = np.fft.ifft2(spec.data)
    real = z.real
    residue = float(np.max(np.abs(z.imag)))
    threshold = IMAG_RESIDUE_FACTOR * (float(np.max(np.abs(real))) + 1.0)
    if residue > threshold:
        raise SpectralInconsistencyError(
            f"imaginary residue {residue:.3e} exceeds threshold {threshold:.3e}; "
            "the spectrum does not correspond to a real image"
        )
    return Image2D(real)


def split_mag_phase(spec: Spectrum2D) -> MagPhase:
    """Magnitude and phase planes of a spectrum (phase 0 where magnitude is 0)."""
    mag = np.abs(spec.data)
    phase = np.angle(spec.data)
    phase = np.where(phase == -np.pi, np.pi, phase)
    phase = np.where(mag == 0.0, 0.0, phase)
    return MagPhase(mag, phase)


def recombine(mp: MagPhase, dc_position: str = "corner") -> Spectrum2D:
    """Rebuild the complex spectrum ``magnitude * exp(1j * phase)``."""
    data = mp.magnitude * (np.cos(mp.phase) + 1j * np.sin(mp.phase))
    return Spectrum2D(data, dc_position=dc_position)


def _rolled(spec: Spectrum2D, sign: int, dc_position: str) -> Spectrum2D:
    w_shift = sign * (spec.width // 2)
    h_shift = sign * (spec.height // 2)
    return Spectrum2D(np.roll(spec.data, (w_shift, h_shift), axis=(0, 1)), dc_position=dc_position)


def shift_dc(spec: Spectrum2D) -> Spectrum2D:
    """Cyclically rotate bins by (W//2, H//2) so the corner DC bin moves to
    the center. ``unshift_dc(shift_dc(s))`` is the bitwise identity."""
    return _rolled(spec, +1, "centered")


def unshift_dc(spec: Spectrum2D) -> Spectrum2D:
    """Inverse of :func:`shift_dc`: move the centered DC bin back to the corner."""
    return _rolled(spec, -1, "corner")
