"""Synthetic speckle image generation with mask-defined echo-free regions.

A phantom is a rectangle of uniformly scattered point reflectors with
normally distributed amplitudes. Scatterers falling inside a binary mask
get zero amplitude, so the mask doubles as the sample's ground truth.
Rendering uses a separable convolution model:

1. bin scatterer amplitudes onto a fine grid (axial step ``c / (2 * fs)``,
   lateral pitch one wavelength),
2. convolve axially with a Gaussian-windowed cosine pulse and laterally
   with a Gaussian beam profile of width ``wavelength * f_number``,
3. envelope-detect via the axial analytic-signal magnitude,
4. log-compress over a 60 dB dynamic range and normalize to [0, 1],
5. resample to the output size with bilinear interpolation.

All randomness flows through explicit seeds; per-sample streams are
derived as ``seed ^ sample_index`` so batch generation is deterministic
and independent of scheduling order.

Array convention: axis 0 is axial (depth), axis 1 is lateral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import hilbert

from .errors import ConfigurationError, IngestionError, InvalidInputError, ParameterError
from .imgio import list_image_files, read_binary_mask
from .spectral import Image2D

__all__ = [
    "PhantomSpec",
    "PsfParams",
    "Scatterers",
    "SimulatedSample",
    "scatter_field",
    "render_bmode",
    "simulate_sample",
    "choose_masks",
    "generate_dataset",
    "resize_bilinear",
]

DYNAMIC_RANGE_DB = 60.0

_SEED_MASK = 0xFFFFFFFFFFFFFFFF

# Amplitude ratio at the -6 dB bandwidth edges of a Gaussian pulse spectrum.
_MINUS_6DB = 10.0 ** (-6.0 / 20.0)
_GAUSS_6DB_WIDTH = 2.0 * math.sqrt(2.0 * math.log(1.0 / _MINUS_6DB))
_GAUSS_FWHM = 2.0 * math.sqrt(2.0 * math.log(2.0))


@dataclass(frozen=True)
class PsfParams:
    """Separable point-spread-function description of the imaging system."""

    center_frequency_hz: float = 3.5e6
    fractional_bandwidth: float = 0.6
    speed_of_sound_mps: float = 1540.0
    f_number: float = 2.0
    sampling_frequency_hz: float = 40e6

    def __post_init__(self):
        for name in (
            "center_frequency_hz",
            "fractional_bandwidth",
            "speed_of_sound_mps",
            "f_number",
            "sampling_frequency_hz",
        ):
            value = getattr(self, name)
            if not (value > 0 and np.isfinite(value)):
                raise ParameterError(f"{name} must be positive and finite, got {value}")
        if not (0.0 < self.fractional_bandwidth < 2.0):
            raise ParameterError(
                f"fractional_bandwidth must lie in (0, 2), got {self.fractional_bandwidth}"
            )

    @property
    def wavelength_m(self) -> float:
        return self.speed_of_sound_mps / self.center_frequency_hz

    @property
    def axial_step_m(self) -> float:
        return self.speed_of_sound_mps / (2.0 * self.sampling_frequency_hz)


@dataclass(frozen=True)
class PhantomSpec:
    """Scatterer-field description: extent, density, echo-free mask, seed."""

    anechoic_mask: Image2D
    width_mm: float = 50.0
    depth_mm: float = 50.0
    n_scatterers: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.n_scatterers < 1:
            raise ParameterError(f"n_scatterers must be >= 1, got {self.n_scatterers}")
        if not (self.width_mm > 0 and self.depth_mm > 0):
            raise ParameterError(
                f"phantom extents must be positive, got {self.width_mm} x {self.depth_mm} mm"
            )
        values = np.unique(self.anechoic_mask.data)
        if not np.all(np.isin(values, (0.0, 1.0))):
            raise InvalidInputError("anechoic_mask values must be exactly 0 or 1")


@dataclass(frozen=True)
class Scatterers:
    """Point reflectors: positions in mm and echo amplitudes."""

    lateral_mm: np.ndarray = field(repr=False)
    axial_mm: np.ndarray = field(repr=False)
    amplitude: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return self.amplitude.shape[0]


@dataclass(frozen=True)
class SimulatedSample:
    """One rendered sample plus everything needed to regenerate it.

    ``bmode`` and ``ground_truth`` share the output size; ``envelope`` is
    the pre-compression detected amplitude at the fine grid's native
    resolution (resampling would distort its first-order statistics).
    """

    bmode: Image2D
    envelope: Image2D
    ground_truth: Image2D
    phantom: PhantomSpec
    psf: PsfParams


def scatter_field(spec: PhantomSpec) -> Scatterers:
    """Draw the seeded scatterer field for a phantom.

    Positions are i.i.d. uniform over the lateral x axial rectangle and
    amplitudes i.i.d. standard normal; scatterers whose nearest mask pixel
    is 1 get amplitude exactly 0.
    """
    rng = np.random.default_rng(spec.seed & _SEED_MASK)
    x = rng.uniform(0.0, spec.width_mm, spec.n_scatterers)
    z = rng.uniform(0.0, spec.depth_mm, spec.n_scatterers)
    amp = rng.standard_normal(spec.n_scatterers)

    mask = spec.anechoic_mask.data
    rows = np.clip((z / spec.depth_mm * mask.shape[0]).astype(np.int64), 0, mask.shape[0] - 1)
    cols = np.clip((x / spec.width_mm * mask.shape[1]).astype(np.int64), 0, mask.shape[1] - 1)
    amp = np.where(mask[rows, cols] > 0, 0.0, amp)
    return Scatterers(lateral_mm=x, axial_mm=z, amplitude=amp)


def _axial_pulse(psf: PsfParams) -> np.ndarray:
    f0 = psf.center_frequency_hz
    sigma_f = psf.fractional_bandwidth * f0 / _GAUSS_6DB_WIDTH
    sigma_t = 1.0 / (2.0 * math.pi * sigma_f)
    half = math.floor(3.0 * sigma_t * psf.sampling_frequency_hz)
    if 2 * half + 1 < 3:
        raise ParameterError(
            "degenerate axial pulse: bandwidth yields a window shorter than 3 samples "
            f"({2 * half + 1} at fs={psf.sampling_frequency_hz:g} Hz)"
        )
    t = np.arange(-half, half + 1) / psf.sampling_frequency_hz
    return np.cos(2.0 * math.pi * f0 * t) * np.exp(-(t**2) / (2.0 * sigma_t**2))


def _lateral_profile(psf: PsfParams) -> np.ndarray:
    # Beam FWHM of wavelength * f_number, expressed in lateral grid lines
    # (the grid pitch is one wavelength, so the width reduces to f_number).
    sigma = psf.f_number / _GAUSS_FWHM
    half = max(1, math.ceil(3.0 * sigma))
    u = np.arange(-half, half + 1)
    return np.exp(-(u**2) / (2.0 * sigma**2))


def _convolve_axis(grid: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    from scipy.ndimage import convolve1d

    return convolve1d(grid, kernel, axis=axis, mode="constant", cval=0.0)


def resize_bilinear(arr: np.ndarray, out_shape: tuple[int, int]) -> np.ndarray:
    """Bilinear resample with pixel-center alignment and edge clamping."""
    arr = np.asarray(arr, dtype=np.float64)
    n0, n1 = arr.shape
    m0, m1 = out_shape

    def _coords(n_in: int, n_out: int):
        x = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        x = np.clip(x, 0.0, n_in - 1.0)
        lo = np.floor(x).astype(np.int64)
        hi = np.minimum(lo + 1, n_in - 1)
        frac = x - lo
        return lo, hi, frac

    r_lo, r_hi, r_f = _coords(n0, m0)
    c_lo, c_hi, c_f = _coords(n1, m1)
    top = arr[r_lo][:, c_lo] * (1.0 - c_f) + arr[r_lo][:, c_hi] * c_f
    bottom = arr[r_hi][:, c_lo] * (1.0 - c_f) + arr[r_hi][:, c_hi] * c_f
    return top * (1.0 - r_f)[:, None] + bottom * r_f[:, None]


def render_bmode(
    spec: PhantomSpec,
    scatterers: Scatterers,
    psf: PsfParams = PsfParams(),
    out_size: int = 256,
) -> SimulatedSample:
    """Render a log-compressed speckle image from a scatterer field."""
    if len(scatterers) == 0:
        raise ParameterError("scatterer list is empty")
    if out_size < 16:
        raise ParameterError(f"out_size must be >= 16, got {out_size}")

    ax_step_mm = psf.axial_step_m * 1e3
    pitch_mm = psf.wavelength_m * 1e3
    n_axial = max(16, math.ceil(spec.depth_mm / ax_step_mm))
    n_lateral = max(4, math.ceil(spec.width_mm / pitch_mm))

    grid = np.zeros((n_axial, n_lateral))
    rows = np.clip((scatterers.axial_mm / ax_step_mm).astype(np.int64), 0, n_axial - 1)
    cols = np.clip((scatterers.lateral_mm / pitch_mm).astype(np.int64), 0, n_lateral - 1)
    np.add.at(grid, (rows, cols), scatterers.amplitude)

    rf = _convolve_axis(grid, _axial_pulse(psf), axis=0)
    rf = _convolve_axis(rf, _lateral_profile(psf), axis=1)
    envelope = np.abs(hilbert(rf, axis=0))

    peak = float(envelope.max())
    if peak > 0.0:
        with np.errstate(divide="ignore"):
            db = 20.0 * np.log10(envelope / peak)
        compressed = np.clip(1.0 + db / DYNAMIC_RANGE_DB, 0.0, 1.0)
    else:
        compressed = np.zeros_like(envelope)

    bmode = resize_bilinear(compressed, (out_size, out_size))
    ground_truth = (
        resize_bilinear(spec.anechoic_mask.data, (out_size, out_size)) > 0.5
    ).astype(np.float64)
    return SimulatedSample(
        bmode=Image2D(bmode),
        envelope=Image2D(envelope),
        ground_truth=Image2D(ground_truth),
        phantom=spec,
        psf=psf,
    )


def simulate_sample(
    spec: PhantomSpec, psf: PsfParams = PsfParams(), out_size: int = 256
) -> SimulatedSample:
    """Scatter and render in one step."""
    return render_bmode(spec, scatter_field(spec), psf, out_size)


def sample_seed(base_seed: int, index: int) -> int:
    """Per-sample stream derivation used by batch generation."""
    return (base_seed ^ index) & _SEED_MASK


def choose_masks(mask_dir: str | Path, count: int, seed: int) -> list[str]:
    """Seeded mask-to-sample assignment: a permutation prefix of the sorted
    directory listing, so growing ``count`` keeps earlier assignments."""
    mask_dir = Path(mask_dir)
    files = list_image_files(mask_dir)
    if count < 0:
        raise ConfigurationError(f"count must be >= 0, got {count}")
    if count > len(files):
        raise ConfigurationError(
            f"requested {count} samples but {mask_dir} holds only {len(files)} mask images"
        )
    order = np.random.default_rng(seed & _SEED_MASK).permutation(len(files))
    return [files[int(i)] for i in order[:count]]


def generate_dataset(
    mask_dir: str | Path,
    count: int,
    seed: int,
    psf: PsfParams = PsfParams(),
    out_size: int = 256,
    width_mm: float = 50.0,
    depth_mm: float = 50.0,
    n_scatterers: int = 100_000,
    jobs: int = 1,
) -> list[tuple[str, SimulatedSample]]:
    """Simulate ``count`` samples, one per mask image drawn from ``mask_dir``.

    Masks are assigned by a seeded permutation of the directory's sorted
    image files; each mask is stretched over the full phantom extent.
    Returns ``(mask_filename, sample)`` pairs in sample order.

    Raises :class:`ConfigurationError` when fewer than ``count`` masks are
    available and :class:`IngestionError` for unreadable or non-binary
    mask files.
    """
    mask_dir = Path(mask_dir)
    chosen = choose_masks(mask_dir, count, seed)

    def build(i: int) -> tuple[str, SimulatedSample]:
        name = chosen[i]
        try:
            mask = read_binary_mask(mask_dir / name, strict=True)
        except IngestionError:
            raise
        except Exception as exc:
            raise IngestionError(f"cannot read mask file {mask_dir / name}: {exc}") from exc
        phantom = PhantomSpec(
            anechoic_mask=mask,
            width_mm=width_mm,
            depth_mm=depth_mm,
            n_scatterers=n_scatterers,
            seed=sample_seed(seed, i),
        )
        return name, simulate_sample(phantom, psf, out_size)

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(build, range(count)))
    return [build(i) for i in range(count)]
