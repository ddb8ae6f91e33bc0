"""uisearch: layout embedding and retrieval engine for mobile UI designs."""

from .layout import (
    AnnotatedLayout,
    BoundingBox,
    ComponentClass,
    LayoutElement,
    multi_hot,
    scale_layout,
    validate_layout,
)
from .net import AutoencoderConfig, ImageAutoencoder, LabelNet, embed
from .raster import DEFAULT_PALETTE, Palette, attention_map, rasterize
from .voc import Corpus, SplitSpec, load_corpus, parse_voc, split_corpus, write_voc

__version__ = "0.1.0"

__all__ = [
    "AnnotatedLayout",
    "BoundingBox",
    "ComponentClass",
    "LayoutElement",
    "multi_hot",
    "scale_layout",
    "validate_layout",
    "AutoencoderConfig",
    "ImageAutoencoder",
    "LabelNet",
    "embed",
    "DEFAULT_PALETTE",
    "Palette",
    "attention_map",
    "rasterize",
    "Corpus",
    "SplitSpec",
    "load_corpus",
    "parse_voc",
    "split_corpus",
    "write_voc",
    "__version__",
]
