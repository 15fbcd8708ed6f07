"""Mask-shrink pixel sampling.

Segmentation masks are eroded inward before sampling so points near mask
edges do not land on background geometry. The shrink fraction is interpreted
as a fraction of the mask's equivalent-disk radius, which makes the erosion
scale-covariant: a 20% shrink of a filled disk removes its outer 20% annulus.
"""

import numpy as np
from scipy import ndimage

from ..errors import EmptyMask
from ..seeding import rng_from


def erode_mask(mask: np.ndarray, shrink_fraction: float) -> np.ndarray:
    """Erode a boolean mask by shrink_fraction of its equivalent-disk radius.

    Any positive shrink removes at least the 1-pixel boundary; edge pixels
    are exactly what sampling must avoid.
    """
    mask = np.asarray(mask, dtype=bool)
    if shrink_fraction <= 0:
        return mask
    area = int(mask.sum())
    if area == 0:
        return mask
    radius = max(shrink_fraction * np.sqrt(area / np.pi), 1.0)
    dist = ndimage.distance_transform_edt(mask)
    return dist > radius


def sample_mask_pixels(mask: np.ndarray, shrink_fraction: float, n: int, seed: int):
    """Sample n pixels (col, row) uniformly with replacement from the eroded
    mask. If erosion empties the mask, falls back to the original mask and
    reports degraded=True. Returns (pixels (n, 2) int64, degraded)."""
    mask = np.asarray(mask, dtype=bool)
    rows, cols = np.nonzero(mask)
    if len(rows) == 0:
        raise EmptyMask("mask has no pixels")
    eroded = erode_mask(mask, shrink_fraction)
    degraded = False
    erows, ecols = np.nonzero(eroded)
    if len(erows) == 0:
        erows, ecols = rows, cols
        degraded = True
    rng = rng_from(seed, "maskpix")
    idx = rng.integers(0, len(erows), size=n)
    pixels = np.stack([ecols[idx], erows[idx]], axis=1).astype(np.int64)
    return pixels, degraded
