import numpy as np
import pytest
from scipy import ndimage


def make_blob_mask(kind: int, seed: int, size: int = 256) -> np.ndarray:
    """One random filled shape (disk, ellipse, or rectangle) on a 0 field."""
    rng = np.random.default_rng(seed)
    mask = np.zeros((size, size))
    yy, xx = np.mgrid[0:size, 0:size]
    cy, cx = rng.integers(size // 4, 3 * size // 4, 2)
    if kind % 3 == 0:
        radius = rng.integers(18, 42)
        mask[(yy - cy) ** 2 + (xx - cx) ** 2 < radius**2] = 1.0
    elif kind % 3 == 1:
        a, b = rng.integers(16, 44, 2)
        mask[((yy - cy) / a) ** 2 + ((xx - cx) / b) ** 2 < 1.0] = 1.0
    else:
        hh, ww = rng.integers(15, 40, 2)
        mask[cy - hh : cy + hh, cx - ww : cx + ww] = 1.0
    return mask


def bmode_region_means(sample) -> tuple[float, float]:
    """Mean intensity inside the eroded truth region and outside its dilation."""
    gt = sample.ground_truth.data > 0.5
    interior = ndimage.binary_erosion(gt, iterations=3)
    exterior = ~ndimage.binary_dilation(gt, iterations=3)
    return float(sample.bmode.data[interior].mean()), float(sample.bmode.data[exterior].mean())


def envelope_speckle_values(sample, mask_arr: np.ndarray) -> np.ndarray:
    """Envelope pixels far from the echo-free region and the grid borders."""
    env = sample.envelope.data
    n_ax, n_lat = env.shape
    size = mask_arr.shape[0]
    rows = np.clip(((np.arange(n_ax) + 0.5) / n_ax * size).astype(int), 0, size - 1)
    cols = np.clip(((np.arange(n_lat) + 0.5) / n_lat * size).astype(int), 0, size - 1)
    fine_mask = mask_arr[np.ix_(rows, cols)] > 0
    keep = ~ndimage.binary_dilation(fine_mask, structure=np.ones((121, 9), bool))
    keep[:100] = False
    keep[-100:] = False
    keep[:, :4] = False
    keep[:, -4:] = False
    return env[keep]


def dark_blob_centroid_distance(sample) -> float:
    """Distance between the darkest connected blob and the truth centroid."""
    gt = sample.ground_truth.data > 0.5
    interior_mean, exterior_mean = bmode_region_means(sample)
    dark = sample.bmode.data < 0.5 * (interior_mean + exterior_mean)
    labels, count = ndimage.label(dark)
    assert count >= 1
    sizes = ndimage.sum(dark, labels, range(1, count + 1))
    blob = labels == (1 + int(np.argmax(sizes)))
    blob_c = np.array(ndimage.center_of_mass(blob))
    gt_c = np.array(ndimage.center_of_mass(gt))
    return float(np.linalg.norm(blob_c - gt_c))


@pytest.fixture
def mask_png_dir(tmp_path):
    """Directory factory writing n binary mask PNGs, returning its path."""
    from echoadapt.imgio import write_binary_mask

    def build(n: int, size: int = 256, subdir: str = "masks"):
        d = tmp_path / subdir
        d.mkdir(parents=True, exist_ok=True)
        for i in range(n):
            write_binary_mask(d / f"mask_{i:03d}.png", make_blob_mask(i, 500 + i, size))
        return d

    return build
