"""Exception hierarchy shared across the package.

CLI exit-code mapping: usage errors exit 1, anything derived from
HtdbuError exits 2, reconciliation exhaustion exits 3.
"""


class HtdbuError(Exception):
    """Base class for all package errors."""


class MissingFile(HtdbuError):
    pass


class EmptyTable(HtdbuError):
    pass


class EmptyInput(HtdbuError):
    pass


class SchemaMismatch(HtdbuError):
    pass


class UnknownColumn(HtdbuError):
    pass


class DegenerateSplit(HtdbuError):
    pass


class ParseError(HtdbuError):
    pass


class InvalidRule(HtdbuError):
    pass


class UnsatisfiableRule(HtdbuError):
    pass


class NonBinaryTarget(HtdbuError):
    pass


class LengthMismatch(HtdbuError):
    pass


class NoNumericColumns(HtdbuError):
    pass


class NoCategoricalColumns(HtdbuError):
    pass


class NotPSD(HtdbuError):
    pass


class MissingXModal(HtdbuError):
    pass


class ConfigError(HtdbuError):
    pass
