"""Grayscale rendering of TFR planes (PGM natively, PNG via Pillow)."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import ValidationError

__all__ = ["export_image"]


def _to_grayscale(mag: np.ndarray, scale: str, normalize: str) -> np.ndarray:
    if scale == "log":
        delta = 1e-12 * float(mag.max())
        mag = 20.0 * np.log10(mag + delta) if delta > 0 else mag
        mag = mag - mag.min()
    elif scale != "linear":
        raise ValidationError(f"unknown scale {scale!r}")
    if normalize == "percentile99":
        ref = float(np.percentile(mag, 99.0))
    elif normalize == "max":
        ref = float(mag.max())
    else:
        raise ValidationError(f"unknown normalize {normalize!r}")
    if ref <= 0:
        return np.zeros(mag.shape, dtype=np.uint8)
    return np.clip(mag / ref * 255.0, 0.0, 255.0).astype(np.uint8)


def export_image(plane, path, scale: str = "linear", normalize: str = "percentile99") -> None:
    """Write the plane magnitude as an 8-bit grayscale image.

    Frequency increases upward and time rightward. The extension picks the
    container: ``.png`` goes through Pillow, anything else is written as a
    binary PGM (P5).
    """
    values = plane.values if hasattr(plane, "values") else np.asarray(plane)
    if values.size == 0:
        raise ValidationError("cannot render an empty plane")
    mag = np.abs(values).astype(np.float64)
    img = _to_grayscale(mag, scale, normalize)[::-1]  # row 0 = highest frequency
    path = Path(path)
    if path.suffix.lower() == ".png":
        from PIL import Image

        Image.fromarray(img, mode="L").save(path)
        return
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
