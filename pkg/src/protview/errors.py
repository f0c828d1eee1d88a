"""Exception types raised across the package."""


class ProtviewError(Exception):
    """Base class for all protview errors."""


class NoAtomsError(ProtviewError):
    """Input contained no usable ATOM records."""


class MalformedRecordError(ProtviewError):
    """An ATOM/HETATM line is too short or unparsable."""

    def __init__(self, line_number: int, reason: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {reason}")


class UnknownResidueError(ProtviewError):
    """Queried residue does not exist in the structure."""


class TooFewPointsError(ProtviewError):
    """Spline or frame construction needs more input points."""


class EmptySceneError(ProtviewError):
    """No renderable geometry for the requested representation."""


class EmptyAxisError(ProtviewError):
    """A rotation grid axis has no angles."""


class CameraMismatchError(ProtviewError):
    """Scene extent exceeds the camera bounds by more than 1%."""


class ShapeMismatchError(ProtviewError):
    """Tensor shape incompatible with the network."""


class LabelOutOfRangeError(ProtviewError):
    """A class label falls outside [0, n_classes)."""


class EmptyDatasetError(ProtviewError):
    """Dataset or manifest holds no samples."""


class UnreadableImageError(ProtviewError):
    """A dataset image could not be read."""


class OrphanViewError(ProtviewError):
    """A view row has no owning protein in the grouping."""


class MisalignedMembersError(ProtviewError):
    """Ensemble members do not share row ids or class count."""


class SingleClassError(ProtviewError):
    """AUC is undefined with fewer than two classes present."""


class MissingPredictionError(ProtviewError):
    """A protein lacks a prediction or a fold assignment."""


class ManifestError(ProtviewError):
    """Dataset manifest is malformed or references missing files."""


class PipelineError(ProtviewError):
    """A pipeline stage failed; the message carries the stage context."""
