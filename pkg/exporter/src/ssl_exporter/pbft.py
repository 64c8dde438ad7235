"""Writer for the little-endian "PBFT" frame-feature format.

Layout: magic "PBFT", u16 version=1, u32 T', u32 D, f64 frame_period_ms,
u16 tag_len, UTF-8 tag bytes, f32 data row-major.  Implemented from the
format description so this package stays independent of the consumer.
"""

from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

MAGIC = b"PBFT"
VERSION = 1
_HEADER = "<4sHIIdH"


def write_pbft(data: np.ndarray, frame_period_ms: float, tag: str, path):
    """Atomically write a (T', D) float array as a PBFT file.

    The payload goes to a temp file in the target directory first and is
    renamed into place, so a concurrent reader never sees a partial file.
    """
    data = np.ascontiguousarray(data, dtype="<f4")
    if data.ndim != 2:
        raise ValueError(f"expected a (T', D) matrix, got shape {data.shape}")
    if not np.all(np.isfinite(data)):
        raise ValueError("non-finite feature values")
    tag_bytes = tag.encode("utf-8")
    header = struct.pack(
        _HEADER, MAGIC, VERSION, data.shape[0], data.shape[1],
        float(frame_period_ms), len(tag_bytes),
    )
    path = os.fspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".",
                               suffix=".pbft.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            fh.write(tag_bytes)
            fh.write(data.tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
