"""Quasiconformal warping: Beltrami coefficients, the linear Beltrami solver,
fold-free warps and model-based restoration.

Maps are (h, w, 2) float arrays of vertex positions, fields are
(h - 1, w - 1, 2) complex arrays (lower and upper face of each cell), and
images are (h, w) or (h, w, c) float arrays in [0, 1].
"""

from ._core import (
    QcwarpError,
    compute_beltrami,
    distortion_field,
    evaluate,
    fourier_truncate,
    identity_map,
    map_error,
    orientation_counts,
    restore,
    simulate,
    solve,
    squash,
    synthetic_texture,
    warp,
)

__all__ = [
    "QcwarpError",
    "compute_beltrami",
    "distortion_field",
    "evaluate",
    "fourier_truncate",
    "identity_map",
    "map_error",
    "orientation_counts",
    "restore",
    "simulate",
    "solve",
    "squash",
    "synthetic_texture",
    "warp",
]
