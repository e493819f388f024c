"""Exception types of ssclab"""
from enum import Enum


class ErrorCode(Enum):
    """Error codes carried by :class:`SSCError`"""
    InvalidArgument = 'invalid_argument'
    Format = 'format'
    Data = 'data'
    Alignment = 'alignment'
    UndefinedMetric = 'undefined_metric'
    UndefinedLoss = 'undefined_loss'
    IO = 'io'


class SSCError(Exception):
    """Base class of all errors raised by the framework"""
    code = ErrorCode.InvalidArgument

    def __init__(self, message):
        super().__init__(message)
        self.message = message

    def __str__(self):
        return '[{}] {}'.format(self.code.value, self.message)


class ArgumentError(SSCError):
    code = ErrorCode.InvalidArgument


class FormatError(SSCError):
    """Malformed byte or text payload. ``offset`` or ``line`` locate the problem."""
    code = ErrorCode.Format

    def __init__(self, message, offset=None, line=None):
        if offset is not None:
            message = '{} (offset={})'.format(message, offset)
        if line is not None:
            message = '{} (line={})'.format(message, line)
        super().__init__(message)
        self.offset = offset
        self.line = line


class DataError(SSCError):
    """Well-formed payload holding invalid values"""
    code = ErrorCode.Data

    def __init__(self, message, index=None, line=None):
        if index is not None:
            message = '{} (index={})'.format(message, index)
        if line is not None:
            message = '{} (line={})'.format(message, line)
        super().__init__(message)
        self.index = index
        self.line = line


class AlignmentError(SSCError):
    code = ErrorCode.Alignment


class UndefinedMetricError(SSCError):
    code = ErrorCode.UndefinedMetric


class UndefinedLossError(SSCError):
    code = ErrorCode.UndefinedLoss


class InputNotFoundError(SSCError):
    code = ErrorCode.IO

    def __init__(self, path):
        super().__init__('Missing input file [path=\'{}\']'.format(path))
        self.path = path
