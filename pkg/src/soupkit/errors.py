"""Exception types shared across the toolkit.

Plain I/O failures propagate as builtin OSError; everything that is a
soupkit contract violation derives from SoupkitError so callers (and the
CLI) can catch one base class.
"""


class SoupkitError(Exception):
    """Base class for soupkit-specific failures."""


class MalformedFileError(SoupkitError):
    """A checkpoint, manifest, or CSV file violates its documented format."""


class SchemaMismatchError(SoupkitError):
    """Tensor collections disagree on names or shapes.

    Carries the first offending tensor name (lexicographic order).
    """

    def __init__(self, tensor_name: str, detail: str = ""):
        self.tensor_name = tensor_name
        msg = f"schema mismatch at tensor {tensor_name!r}"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)


class EmptyPoolError(SoupkitError):
    """An operation that needs at least one candidate received none."""


class LengthMismatchError(SoupkitError):
    """Two parallel sequences differ in length."""


class ShapeMismatchError(SoupkitError):
    """Arrays that must share a shape do not."""


class DimensionMismatchError(SoupkitError):
    """Input width does not match what the model expects."""


class NotOnSimplexError(SoupkitError):
    """A probability row is outside [0, 1] or does not sum to 1."""


class TooFewModelsError(SoupkitError):
    """Pairwise analysis needs at least two models."""


class AsymmetricInputError(SoupkitError):
    """A matrix required to be symmetric is not."""


class DimensionTooLargeError(SoupkitError):
    """Requested embedding dimension too large for the point count."""


class DegenerateDistancesError(SoupkitError):
    """All pairwise distances are zero; stress is undefined."""


class EvaluatorFailure(SoupkitError):
    """A user-supplied evaluator returned an unusable value."""
