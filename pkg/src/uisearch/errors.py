"""Exception hierarchy shared across the package.

Every error raised by uisearch derives from :class:`UISearchError` so callers
(CLI, HTTP service) can map failures to exit codes / status codes uniformly.
"""


class UISearchError(Exception):
    """Base class for all uisearch errors."""


# --- layout validation ----------------------------------------------------

class EmptyCanvas(UISearchError):
    """Canvas width or height is not strictly positive."""


class DegenerateBox(UISearchError):
    """A bounding box has zero area (possibly after clamping)."""


# --- ingestion ------------------------------------------------------------

class MalformedXml(UISearchError):
    """The input is not well-formed Pascal-VOC XML."""


class MalformedJson(UISearchError):
    """The input is not valid JSON or violates the detections schema."""


class UnknownClass(UISearchError):
    """An object name does not belong to the 12-class component table."""

    def __init__(self, name: str):
        super().__init__(f"unknown component class: {name!r}")
        self.name = name


class MissingField(UISearchError):
    """A required XML field is absent."""

    def __init__(self, path: str):
        super().__init__(f"missing required field: {path}")
        self.path = path


class EmptyCorpus(UISearchError):
    """The corpus holds no layouts."""


# --- numerics / networks --------------------------------------------------

class ShapeMismatch(UISearchError):
    """Tensor shapes are incompatible for the requested operation."""


class OddSpatialDim(UISearchError):
    """2x2 pooling needs even spatial dimensions."""


class NonDivisibleResolution(UISearchError):
    """Target resolution must divide the source resolution."""


class ResolutionMismatch(UISearchError):
    """Input image resolution differs from the model resolution."""


class EmptyResolution(UISearchError):
    """Raster resolution must be strictly positive."""


class EmptySplit(UISearchError):
    """The training split holds no layouts."""


class DivergedLoss(UISearchError):
    """Training produced a non-finite loss."""


class WeightsFormatError(UISearchError):
    """A weights file is corrupt or does not match its config."""


# --- retrieval ------------------------------------------------------------

class DimensionMismatch(UISearchError):
    """Embedding vectors have different dimensions."""


class EmptyIndex(UISearchError):
    """The embedding index holds no entries."""


class IndexFormatError(UISearchError):
    """An index file is corrupt."""


class FrozenIndexError(UISearchError):
    """The index is frozen (or not yet frozen) for the attempted operation."""


# --- metrics --------------------------------------------------------------

class MissingConfidence(UISearchError):
    """A detection is missing its confidence score."""


class UnknownId(UISearchError):
    """A retrieved id has no category label."""

    def __init__(self, layout_id: str):
        super().__init__(f"no category label for id: {layout_id!r}")
        self.layout_id = layout_id


class NoGroundTruth(UISearchError):
    """AP is undefined for a class with no ground-truth instances."""


class EmptyTestSet(UISearchError):
    """No queries remain after category filtering."""


class EmptyInput(UISearchError):
    """An aggregate over an empty collection was requested."""
