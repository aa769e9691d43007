"""Exception hierarchy shared by every stage of the pipeline."""


class SynthbalError(Exception):
    """Base class for all package errors."""


# -- ingestion -------------------------------------------------------------

class IngestionError(SynthbalError):
    pass


class MissingFile(IngestionError):
    def __init__(self, path):
        self.path = str(path)
        super().__init__(f"input file not found: {self.path}")


class MissingLabelColumn(IngestionError):
    def __init__(self, column, path=None):
        self.column = column
        where = f" in {path}" if path is not None else ""
        super().__init__(f"label column {column!r} not present{where}")


class NonNumericCell(IngestionError):
    """Raised with 1-based data row (header excluded) and 1-based file column."""

    def __init__(self, row, col, value=None):
        self.row, self.col, self.value = row, col, value
        super().__init__(f"non-numeric cell at row {row}, col {col}: {value!r}")


class MissingValue(IngestionError):
    def __init__(self, row, col):
        self.row, self.col = row, col
        super().__init__(f"missing value at row {row}, col {col}")


class InvalidLabel(IngestionError):
    def __init__(self, row, value):
        self.row, self.value = row, value
        super().__init__(f"label at row {row} must be 0 or 1, got {value!r}")


class MalformedCsv(IngestionError):
    pass


# -- data plumbing ---------------------------------------------------------

class TooFewRowsPerClass(SynthbalError):
    pass


class DegenerateSplit(SynthbalError):
    pass


class ShapeMismatch(SynthbalError):
    pass


# -- sampling --------------------------------------------------------------

class SamplingError(SynthbalError):
    pass


class ClassTooSmall(SamplingError):
    pass


class NonFiniteLoss(SamplingError):
    def __init__(self, epoch, gen_loss, disc_loss):
        self.epoch = epoch
        super().__init__(
            f"non-finite GAN loss at epoch {epoch}: "
            f"generator={gen_loss!r}, discriminator={disc_loss!r}"
        )


# -- tuning ----------------------------------------------------------------

class TuningError(SynthbalError):
    pass


class SpecConflict(TuningError):
    pass


class OutOfOrderStep(TuningError):
    pass


class NoCompleteTrials(TuningError):
    pass


class TrialPruned(Exception):
    """Raised from inside an objective to stop a trial the pruner rejected."""


# -- learners / ensembles / metrics ---------------------------------------

class SingleClassInput(SynthbalError):
    pass


class AllZeroScores(SynthbalError):
    pass


class LengthMismatch(SynthbalError):
    pass


class EmptyInput(SynthbalError):
    pass


class FoldError(SynthbalError):
    """Wraps a learner or sampler failure with the fold it happened in."""

    def __init__(self, fold, cause):
        self.fold = fold
        self.cause = cause
        super().__init__(f"fold {fold}: {type(cause).__name__}: {cause}")
