"""File formats, image export, and the batch segmentation pipeline."""

from .formats import (
    MultichannelRecord,
    read_record,
    write_record,
    read_signal,
    write_signal,
    read_tfr,
    write_tfr,
    write_ridges_csv,
)
from .images import export_image
from .pipeline import (
    SegmentPlan,
    SegmentTensor,
    ManifestEntry,
    segment,
    preprocess_batch,
    write_segment_tensor,
    read_manifest,
)

__all__ = [
    "MultichannelRecord",
    "read_record",
    "write_record",
    "read_signal",
    "write_signal",
    "read_tfr",
    "write_tfr",
    "write_ridges_csv",
    "export_image",
    "SegmentPlan",
    "SegmentTensor",
    "ManifestEntry",
    "segment",
    "preprocess_batch",
    "write_segment_tensor",
    "read_manifest",
]
