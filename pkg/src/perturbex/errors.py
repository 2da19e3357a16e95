"""Exception types shared across the package."""

from __future__ import annotations


class PerturbexError(Exception):
    """Base class for all package errors."""


class SchemaError(PerturbexError):
    """Schema document is malformed or internally inconsistent."""


class SchemaMismatch(PerturbexError):
    """CSV column set does not match the declared schema."""


class ParseError(PerturbexError):
    """A cell failed to parse; carries the row/column location."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


class EmptyDataset(PerturbexError):
    """Dataset has no rows."""


class AllMissingColumn(PerturbexError):
    """No non-missing values to draw replacements from."""


class ContrastiveSetTooSmall(PerturbexError):
    """Fewer rows below the poverty line than the configured floor."""

    def __init__(self, found: int, required: int):
        super().__init__(
            f"contrastive set has {found} rows, below the floor of {required}; "
            "explanations against it would be statistically meaningless"
        )
        self.found = found
        self.required = required


class EncodingError(PerturbexError):
    """Raw value outside the preprocessing pipeline's declared domain."""


class DegenerateDesign(PerturbexError):
    """Rank-deficient design matrix with ridge disabled."""


class InvalidParams(PerturbexError):
    """Model hyperparameters out of range."""


class LengthMismatch(PerturbexError):
    """Effect vector length disagrees with the encoded width."""


class ProtocolError(PerturbexError):
    """External model process sent a malformed or mismatched response."""


class ProcessExit(PerturbexError):
    """External model process terminated unexpectedly."""


class PartitionError(PerturbexError):
    """Feature groups do not partition the feature index set."""


class FingerprintMismatch(PerturbexError):
    """Artifacts were produced under different configurations."""

    def __init__(self, expected: str, found: str):
        super().__init__(f"config fingerprint mismatch: expected {expected}, found {found}")
        self.expected = expected
        self.found = found


class BudgetExceeded(PerturbexError):
    """Planned model evaluations exceed the configured ceiling."""

    def __init__(self, planned: int, budget: int):
        super().__init__(
            f"explanation would need {planned} model evaluations, over the budget of {budget}"
        )
        self.planned = planned
        self.budget = budget
