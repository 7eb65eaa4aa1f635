"""Online conformal compression: zero-delay lossy coding with a deterministic
per-sequence distortion bound."""

from ._occ import (
    OccConfigError,
    OccIntegrityError,
    OccIoError,
    coverage_bound,
    decode,
    encode,
    run_trace,
)

__all__ = [
    "OccConfigError",
    "OccIntegrityError",
    "OccIoError",
    "coverage_bound",
    "decode",
    "encode",
    "run_trace",
]

__version__ = "0.1.0"
