"""Exception taxonomy shared across the engine.

Every error a caller may want to branch on gets its own class; the CLI and
the HTTP service map these onto exit codes / status codes.
"""


class BcxError(Exception):
    """Base class for all engine errors."""


class SchemaError(BcxError):
    """Malformed schema sidecar or schema/CSV mismatch."""


class DataError(BcxError):
    """Bad cell content; carries row/column location."""

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        loc = ""
        if row is not None or column is not None:
            loc = f" (row={row}, column={column})"
        super().__init__(message + loc)


class ConstantFeatureError(BcxError):
    """Standardization requested for a feature with zero spread."""


class ArityError(BcxError):
    """Observation length does not match the feature schema."""


class SingleClassError(BcxError):
    """Training requires at least two classes with rows."""


class TrainingDivergedError(BcxError):
    """Non-finite loss during built-in model training."""


class ProtocolError(BcxError):
    """External model process violated the line protocol."""


class TransportError(BcxError):
    """External model process died or its streams broke."""


class NormalizationError(ProtocolError):
    """External model returned probability rows too far from summing to 1."""


class TargetClassError(BcxError):
    """Boundary search asked for the class the model already predicts."""


class BandStarvationError(BcxError):
    """A probability band has no synthetic points to draw from."""

    def __init__(self, band, lo, hi, pool_count):
        self.band = band
        self.pool_count = pool_count
        super().__init__(
            f"band {band} ({lo:g}, {hi:g}] holds {pool_count} pool points; "
            "regenerate with a larger pool"
        )


class SingularDesignError(BcxError):
    """Design matrix became numerically singular during fitting."""

    def __init__(self, term_names):
        self.term_names = list(term_names)
        super().__init__(f"singular design for terms: {', '.join(self.term_names)}")


class ConvergenceError(BcxError):
    """Iterative fit exhausted its iteration cap."""


class NoFeasibleRecordsError(BcxError):
    """Percent fidelity is undefined without feasible records."""


class ConfigError(BcxError):
    """Invalid run configuration or config file."""
