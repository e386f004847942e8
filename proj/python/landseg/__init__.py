"""Land-cover segmentation of orthophotos from vector maps.

Array functions work on numpy arrays: RGB images are (H, W, 3) uint8 and
label maps are (H, W) uint8 class ids with 255 for nodata. Pipeline
functions take an INI config path plus ``section.key=value`` overrides and
return the text the matching ``landseg`` subcommand prints.
"""

from ._landseg import (
    NODATA,
    NUM_CLASSES,
    PUBLISHED_WEIGHTS,
    DataError,
    Error,
    NumericError,
    Segmenter,
    UsageError,
    colorize,
    colorize_file,
    compute_weights,
    cut_tiles,
    decolorize,
    evaluate,
    evaluate_labels,
    image_to_input,
    infer,
    nodata_fraction,
    prepare,
    rasterize,
    stats,
    train,
    weighted_cross_entropy,
    write_fixture,
)

CLASS_NAMES = ("dense_forest", "sparse_forest", "moor", "herbaceous_formation", "building", "road")

__all__ = [
    "CLASS_NAMES",
    "NODATA",
    "NUM_CLASSES",
    "PUBLISHED_WEIGHTS",
    "DataError",
    "Error",
    "NumericError",
    "Segmenter",
    "UsageError",
    "colorize",
    "colorize_file",
    "compute_weights",
    "cut_tiles",
    "decolorize",
    "evaluate",
    "evaluate_labels",
    "image_to_input",
    "infer",
    "nodata_fraction",
    "prepare",
    "rasterize",
    "stats",
    "train",
    "weighted_cross_entropy",
    "write_fixture",
]
