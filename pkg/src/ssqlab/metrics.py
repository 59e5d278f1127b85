"""Concentration and reconstruction-quality measures.

These turn the qualitative "sharper plane, recoverable modes" story into
numbers: Rényi entropy of the normalized energy distribution (lower =
sharper), the fraction of plane magnitude hugging known frequency tracks,
and plain relative L2 error against ground truth.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, asdict

import numpy as np

from .errors import ValidationError

__all__ = [
    "ConcentrationReport",
    "renyi_entropy",
    "ridge_energy_fraction",
    "relative_l2_error",
    "concentration_report",
    "report_kv_lines",
    "write_reports_csv",
]


@dataclass(frozen=True)
class ConcentrationReport:
    """Entropy + track-energy summary for one plane."""

    label: str
    renyi_entropy_bits: float
    ridge_energy_fraction: float | None
    order: float
    halfwidth_bins: int | None

    def __post_init__(self):
        if self.renyi_entropy_bits < -1e-9:
            raise ValidationError("entropy must be non-negative")
        f = self.ridge_energy_fraction
        if f is not None and not (-1e-12 <= f <= 1 + 1e-12):
            raise ValidationError("ridge_energy_fraction must lie in [0, 1]")


def _plane_values(plane) -> np.ndarray:
    return plane.values if hasattr(plane, "values") else np.asarray(plane)


def renyi_entropy(plane, order: float = 3.0) -> float:
    """Order-``order`` Rényi entropy (bits) of the normalized squared plane.

    ``H = log2(sum p^a) / (1 - a)`` over ``p = |V|^2 / sum |V|^2``. Zero for
    a single occupied cell, ``log2(n_cells)`` for a uniform plane, and
    invariant to global rescaling.
    """
    if order == 1.0:
        raise ValidationError("order 1 is the Shannon limit; use order != 1")
    v = _plane_values(plane)
    p = np.abs(v.ravel()) ** 2
    total = p.sum()
    if total <= 0:
        raise ValidationError("plane has no energy")
    p = p / total
    nz = p[p > 0]
    return float(np.log2(np.sum(nz ** order)) / (1.0 - order))


def _track_bins(freq_axis: np.ndarray, track_hz: np.ndarray) -> np.ndarray:
    """Nearest plane bin per frame for a frequency track (log-aware)."""
    idx = np.searchsorted(freq_axis, track_hz)
    idx = np.clip(idx, 1, len(freq_axis) - 1)
    left = freq_axis[idx - 1]
    right = freq_axis[idx]
    pick_left = np.abs(track_hz - left) <= np.abs(right - track_hz)
    return np.where(pick_left, idx - 1, idx)


def ridge_energy_fraction(plane, if_tracks_hz, halfwidth_bins: int) -> float:
    """Fraction of total plane magnitude within ``halfwidth_bins`` of any track.

    ``if_tracks_hz`` has one row per track, one column per frame of the
    plane. Monotone non-decreasing in the halfwidth.
    """
    tracks = np.atleast_2d(np.asarray(if_tracks_hz, dtype=float))
    v = np.abs(_plane_values(plane))
    freq_axis = plane.eta_axis_hz if hasattr(plane, "eta_axis_hz") else plane.freq_axis_hz
    if tracks.size == 0:
        raise ValidationError("no tracks given")
    if tracks.shape[1] != v.shape[1]:
        raise ValidationError(
            f"tracks have {tracks.shape[1]} frames but plane has {v.shape[1]}"
        )
    if halfwidth_bins < 0:
        raise ValidationError("halfwidth_bins must be >= 0")
    total = v.sum()
    if total <= 0:
        raise ValidationError("plane has no energy")
    R = v.shape[0]
    inside = np.zeros(v.shape, dtype=bool)
    rows = np.arange(R)[:, None]
    for tr in tracks:
        centers = _track_bins(freq_axis, tr)[None, :]
        inside |= np.abs(rows - centers) <= halfwidth_bins
    return float(v[inside].sum() / total)


def relative_l2_error(estimate, truth, interior_fraction: float = 1.0) -> float:
    """``||est - truth||_2 / ||truth||_2`` over the centered interior fraction.

    ``estimate`` may be a ModeEstimate or a plain array; ``truth`` a
    SampledSignal or array, already on the same time grid (truth should be
    evaluated exactly on that grid, not resampled).
    """
    est = np.asarray(getattr(estimate, "samples", estimate))
    tru = np.asarray(getattr(truth, "samples", truth))
    if est.shape != tru.shape:
        raise ValidationError(f"length mismatch: {est.shape} vs {tru.shape}")
    if not (0 < interior_fraction <= 1.0):
        raise ValidationError("interior_fraction must lie in (0, 1]")
    n = len(est)
    skip = int(round(n * (1.0 - interior_fraction) / 2.0))
    sl = slice(skip, n - skip)
    denom = np.linalg.norm(tru[sl])
    if denom == 0:
        raise ValidationError("truth has zero norm on the interior")
    return float(np.linalg.norm(est[sl] - tru[sl]) / denom)


def concentration_report(
    plane,
    label: str,
    if_tracks_hz=None,
    halfwidth_bins: int | None = None,
    order: float = 3.0,
) -> ConcentrationReport:
    """Bundle entropy (and optionally track energy fraction) for one plane."""
    frac = None
    if if_tracks_hz is not None:
        if halfwidth_bins is None:
            raise ValidationError("halfwidth_bins is required with tracks")
        frac = ridge_energy_fraction(plane, if_tracks_hz, halfwidth_bins)
    return ConcentrationReport(
        label=label,
        renyi_entropy_bits=renyi_entropy(plane, order),
        ridge_energy_fraction=frac,
        order=order,
        halfwidth_bins=halfwidth_bins,
    )


def report_kv_lines(report: ConcentrationReport) -> list[str]:
    """Render a report as ``key=value`` lines."""
    out = []
    for key, val in asdict(report).items():
        if val is None:
            continue
        out.append(f"{key}={val}")
    return out


def write_reports_csv(reports, path) -> None:
    """Write reports as a CSV table (one row per report)."""
    fields = ["label", "renyi_entropy_bits", "ridge_energy_fraction", "order", "halfwidth_bins"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for rep in reports:
            writer.writerow(asdict(rep))
