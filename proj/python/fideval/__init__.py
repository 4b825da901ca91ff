"""Fidelity-based evaluation of super-resolution results."""

from ._fideval import (
    Error,
    PreconditionError,
    contrast_enhance,
    downsample,
    fidelity,
    generate_pairs,
    load_image,
    psnr,
    run_study,
    save_image,
    ssim,
    uqi,
    upsample_bicubic,
    upsample_replicate,
    verify_null_space,
    warp,
)

__all__ = [
    "Error",
    "PreconditionError",
    "contrast_enhance",
    "downsample",
    "fidelity",
    "generate_pairs",
    "load_image",
    "psnr",
    "run_study",
    "save_image",
    "ssim",
    "uqi",
    "upsample_bicubic",
    "upsample_replicate",
    "verify_null_space",
    "warp",
]
