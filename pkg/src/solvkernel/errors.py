"""Exception hierarchy.

Every error carries a short machine-readable ``code`` used by the CLI when
it reports failures as ``{"error": code, "detail": text}``.
"""


class SolvKernelError(Exception):
    code = "Error"


class SmilesError(SolvKernelError, ValueError):
    code = "SmilesError"


class UnsupportedElement(SmilesError):
    code = "UnsupportedElement"


class MalformedBracket(SmilesError):
    code = "MalformedBracket"


class IllegalCharacter(SmilesError):
    code = "IllegalCharacter"


class UnbalancedParentheses(SmilesError):
    code = "UnbalancedParentheses"


class UnclosedRingBond(SmilesError):
    code = "UnclosedRingBond"


class ConflictingRingBondOrder(SmilesError):
    code = "ConflictingRingBondOrder"


class ValenceExceeded(SmilesError):
    code = "ValenceExceeded"


class GraphError(SolvKernelError, ValueError):
    code = "GraphError"


class ElementMissingFromTable(GraphError):
    code = "ElementMissingFromTable"


class IsolatedVertex(GraphError):
    code = "IsolatedVertex"


class KernelError(SolvKernelError):
    code = "KernelError"


class FixedPointDivergence(KernelError, RuntimeError):
    code = "FixedPointDivergence"


class SingularSystem(KernelError, RuntimeError):
    code = "SingularSystem"


class DegenerateSelfKernel(KernelError, ValueError):
    code = "DegenerateSelfKernel"


class OracleScaleExceeded(KernelError, ValueError):
    code = "OracleScaleExceeded"


class NotPositiveDefinite(SolvKernelError, ValueError):
    code = "NotPositiveDefinite"


class EmptyDataset(SolvKernelError, ValueError):
    code = "EmptyDataset"


class TooFewRecords(SolvKernelError, ValueError):
    code = "TooFewRecords"


class LengthMismatch(SolvKernelError, ValueError):
    code = "LengthMismatch"


class DegenerateVariance(SolvKernelError, ValueError):
    code = "DegenerateVariance"


class EmptyInput(SolvKernelError, ValueError):
    code = "EmptyInput"


class NonSymmetricInput(SolvKernelError, ValueError):
    code = "NonSymmetricInput"


class MissingColumn(SolvKernelError, ValueError):
    code = "MissingColumn"


class DuplicateId(SolvKernelError, ValueError):
    code = "DuplicateId"


class UnparsableTarget(SolvKernelError, ValueError):
    code = "UnparsableTarget"


class VersionMismatch(SolvKernelError, ValueError):
    code = "VersionMismatch"


class CorruptModel(SolvKernelError, ValueError):
    code = "CorruptModel"


class ConfigError(SolvKernelError, ValueError):
    code = "ConfigError"
