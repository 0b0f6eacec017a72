"""Separable Gaussian blur used to hide faces and on-screen text.

The inner loops are compiled with numba when it is available; setting
the environment variable DDPDEID_DISABLE_NUMBA to a non-empty value
forces the plain numpy path instead.  Both paths clamp coordinates at
the image border (replicate padding) and produce identical results.

Blur strength scales with the patch: sigma is max(width, height) / 6
and the kernel spans 6 sigma + 1 pixels, rounded up to odd and never
narrower than 31, so a face filling the frame is unrecognisable while a
thumbnail is not over-smoothed into a uniform smear.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


def numba_enabled() -> bool:
    return HAS_NUMBA and not os.environ.get("DDPDEID_DISABLE_NUMBA")


MIN_KERNEL = 31


def blur_params(width: int, height: int) -> tuple[float, int]:
    """Sigma and kernel size for a patch of the given dimensions."""
    sigma = max(width, height) / 6.0
    size = math.ceil(6.0 * sigma + 1.0)
    if size % 2 == 0:
        size += 1
    return sigma, max(size, MIN_KERNEL)


def gaussian_kernel(sigma: float, size: int) -> np.ndarray:
    if size % 2 == 0 or size < 1:
        raise ValueError(f"kernel size must be odd and positive, got {size}")
    radius = size // 2
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-0.5 * (offsets / sigma) ** 2)
    return kernel / kernel.sum()


@njit(cache=True)
def _sep_blur_jit(src, kernel):  # pragma: no cover - numba-compiled
    height, width = src.shape
    taps = kernel.shape[0]
    radius = taps // 2
    tmp = np.empty((height, width))
    for y in range(height):
        for x in range(width):
            acc = 0.0
            for j in range(taps):
                xx = x + j - radius
                if xx < 0:
                    xx = 0
                elif xx >= width:
                    xx = width - 1
                acc += src[y, xx] * kernel[j]
            tmp[y, x] = acc
    out = np.empty((height, width))
    for y in range(height):
        for x in range(width):
            acc = 0.0
            for j in range(taps):
                yy = y + j - radius
                if yy < 0:
                    yy = 0
                elif yy >= height:
                    yy = height - 1
                acc += tmp[yy, x] * kernel[j]
            out[y, x] = acc
    return out


def _conv_axis_numpy(src: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    radius = len(kernel) // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (radius, radius)
    padded = np.pad(src, pad, mode="edge")
    out = np.zeros_like(src)
    window = [slice(None), slice(None)]
    for j, weight in enumerate(kernel):
        window[axis] = slice(j, j + src.shape[axis])
        out += padded[tuple(window)] * weight
    return out


def _sep_blur_numpy(src: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    tmp = _conv_axis_numpy(src, kernel, axis=1)
    return _conv_axis_numpy(tmp, kernel, axis=0)


def convolve_separable(
    channel: np.ndarray, kernel: np.ndarray, use_numba: bool | None = None
) -> np.ndarray:
    """Row-then-column convolution of one float64 channel."""
    channel = np.ascontiguousarray(channel, dtype=np.float64)
    kernel = np.ascontiguousarray(kernel, dtype=np.float64)
    if use_numba is None:
        use_numba = numba_enabled()
    if use_numba and HAS_NUMBA:
        return _sep_blur_jit(channel, kernel)
    return _sep_blur_numpy(channel, kernel)


def blur_patch(patch: np.ndarray, use_numba: bool | None = None) -> np.ndarray:
    """Blur one uint8 patch (greyscale or with channels last)."""
    if patch.ndim not in (2, 3):
        raise ValueError(f"expected 2-D or 3-D patch, got shape {patch.shape}")
    height, width = patch.shape[:2]
    sigma, size = blur_params(width, height)
    kernel = gaussian_kernel(sigma, size)
    src = patch.astype(np.float64)
    if patch.ndim == 2:
        out = convolve_separable(src, kernel, use_numba)
    else:
        out = np.empty_like(src)
        for c in range(patch.shape[2]):
            out[:, :, c] = convolve_separable(src[:, :, c], kernel, use_numba)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)
