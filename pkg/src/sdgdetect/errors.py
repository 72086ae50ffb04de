"""Error types shared across the package.

Every error carries a stable machine-readable ``code`` and the process
exit code the CLI maps it to (3 = data/schema problem, 4 = degenerate
computation, 2 = bad parameters).
"""


class SdgToolError(Exception):
    code = "E_ERROR"
    exit_code = 3


class IoError(SdgToolError):
    code = "E_IO"


class SchemaError(SdgToolError):
    code = "E_SCHEMA"


class QuerySyntaxError(SdgToolError):
    code = "E_SYNTAX"

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class NearOperandError(SdgToolError):
    code = "E_NEAR_OPERAND"


class NoLabelsError(SdgToolError):
    code = "E_NO_LABELS"


class UndefinedMetricError(SdgToolError):
    code = "E_UNDEFINED"
    exit_code = 4


class DegenerateInputError(SdgToolError):
    code = "E_DEGENERATE"
    exit_code = 4


class MissingSystemError(SdgToolError):
    code = "E_MISSING_SYSTEM"


class OneClassError(SdgToolError):
    code = "E_ONE_CLASS"
    exit_code = 4


class ParamError(SdgToolError):
    code = "E_PARAMS"
    exit_code = 2


class SchemaMismatchError(SdgToolError):
    code = "E_SCHEMA_MISMATCH"


class ModelVersionError(SdgToolError):
    code = "E_VERSION"


class ModelCorruptError(SdgToolError):
    code = "E_CORRUPT"
