"""File interchange: 8-bit grayscale images and raw float32 planes.

Images move through the pipeline as PNG or PGM files. Grayscale pixels
map to [0, 1] by dividing by 255; writing rounds ``clip(x, 0, 1) * 255``
to the nearest integer, so an 8-bit roundtrip is exact. Binary masks use
the ``pixel > 127`` convention. Lossless float planes are stored as raw
little-endian float32 next to a JSON sidecar
``{"width": W, "height": H, "dtype": "f32le"}`` where ``width`` counts
the first (outer) array axis.

No output file contains a timestamp; identical data yields identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import IngestionError
from .spectral import Image2D

__all__ = [
    "IMAGE_EXTENSIONS",
    "list_image_files",
    "read_image",
    "write_image",
    "read_binary_mask",
    "write_binary_mask",
    "write_float_raw",
    "read_float_raw",
]

IMAGE_EXTENSIONS = (".png", ".pgm")


def list_image_files(directory: str | Path) -> list[str]:
    """Sorted image filenames (not paths) directly inside ``directory``."""
    directory = Path(directory)
    if not directory.is_dir():
        raise IngestionError(f"not a directory: {directory}")
    return sorted(
        p.name for p in directory.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS
    )


def _load_gray(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("L"), dtype=np.uint8)
    except (OSError, UnidentifiedImageError, ValueError) as exc:
        raise IngestionError(f"cannot read image file {path}: {exc}") from exc


def read_image(path: str | Path) -> Image2D:
    """Load an 8-bit grayscale image as values in [0, 1]."""
    return Image2D(_load_gray(Path(path)) / 255.0)


def write_image(path: str | Path, img: Image2D) -> None:
    """Write an image as 8-bit grayscale; values are clipped to [0, 1]."""
    data = np.clip(img.data, 0.0, 1.0)
    quantized = np.rint(data * 255.0).astype(np.uint8)
    Image.fromarray(quantized, mode="L").save(Path(path))


def read_binary_mask(path: str | Path, strict: bool = False) -> Image2D:
    """Load a mask image, binarizing at pixel > 127.

    With ``strict=True`` the file must already be binary (at most two
    distinct gray levels); anything else raises :class:`IngestionError`.
    """
    path = Path(path)
    gray = _load_gray(path)
    if strict and np.unique(gray).size > 2:
        raise IngestionError(
            f"mask file {path} is not binary: {np.unique(gray).size} distinct gray levels"
        )
    return Image2D((gray > 127).astype(np.float64))


def write_binary_mask(path: str | Path, mask: Image2D | np.ndarray) -> None:
    """Write a 0/1 array as a 0/255 grayscale image."""
    data = mask.data if isinstance(mask, Image2D) else np.asarray(mask)
    Image.fromarray(((data > 0) * 255).astype(np.uint8), mode="L").save(Path(path))


def write_float_raw(path: str | Path, img: Image2D) -> None:
    """Write raw little-endian float32 plus its JSON sidecar."""
    path = Path(path)
    path.write_bytes(np.ascontiguousarray(img.data, dtype="<f4").tobytes())
    sidecar = {"width": img.width, "height": img.height, "dtype": "f32le"}
    path.with_suffix(path.suffix + ".json").write_text(
        json.dumps(sidecar, sort_keys=True) + "\n", encoding="utf-8"
    )


def read_float_raw(path: str | Path) -> Image2D:
    """Read a raw float32 plane using its JSON sidecar for the shape."""
    path = Path(path)
    sidecar_path = path.with_suffix(path.suffix + ".json")
    try:
        sidecar = json.loads(sidecar_path.read_text(encoding="utf-8"))
        width, height = int(sidecar["width"]), int(sidecar["height"])
        if sidecar.get("dtype") != "f32le":
            raise IngestionError(f"unsupported dtype in sidecar {sidecar_path}: {sidecar.get('dtype')}")
        raw = np.frombuffer(path.read_bytes(), dtype="<f4")
        if raw.size != width * height:
            raise IngestionError(
                f"raw file {path} holds {raw.size} values, sidecar promises {width * height}"
            )
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        raise IngestionError(f"cannot read float raw {path}: {exc}") from exc
    return Image2D(raw.reshape(width, height).astype(np.float64))
