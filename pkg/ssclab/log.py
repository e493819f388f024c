"""Logger subsystem"""
import os
import sys
import time
import inspect
from enum import IntEnum
from contextlib import contextmanager
from colorama import Fore, Style
from . import comp


class LogLevel(IntEnum):
    Debug = -10
    Info = 10
    Warn = 20
    Err = 30


class LoggerContext(comp.Component):
    """Logger interface"""
    def log(self, level, severity, filename, line, message):
        raise NotImplementedError

    def update_indentation(self, n):
        pass

    def set_severity(self, severity):
        pass


def _header(level, elapsed, filename, line):
    name = {
        LogLevel.Debug: 'D',
        LogLevel.Info: 'I',
        LogLevel.Warn: 'W',
        LogLevel.Err: 'E'
    }.get(level, 'I')
    file_no_ext = os.path.splitext(os.path.basename(filename))[0]
    line_and_file = '{}@{}'.format(line, file_no_ext)[:10]
    return name, '[{}|{:.3f}|{:<10}] '.format(name, elapsed, line_and_file)


@comp.ssc_component('logger::default')
class DefaultLogger(LoggerContext):
    """Console logger.

    Properties
    - ``stream``: ``'stdout'`` (default) or ``'stderr'``; warnings and errors always go to stderr.
    - ``color``: colorize the level tag (default True).
    - ``min_level``: messages below this level are dropped (default Debug).
    """
    def construct(self, prop):
        stream = prop.get('stream', 'stdout')
        if stream not in ('stdout', 'stderr'):
            return False
        self.stream = stream
        self.color = prop.get('color', True)
        self.min_level = LogLevel(prop.get('min_level', LogLevel.Debug))
        self.severity = 0
        self.n = 0
        self.start = time.time()
        return True

    def log(self, level, severity, filename, line, message):
        if level < self.min_level or self.severity > severity:
            return
        out = sys.stdout if self.stream == 'stdout' else sys.stderr
        if level >= LogLevel.Warn:
            out = sys.stderr
        name, header = _header(level, time.time() - self.start, filename, line)
        if self.color:
            color = {'D': Fore.CYAN, 'W': Fore.YELLOW, 'E': Fore.RED}.get(name, Fore.GREEN)
            header = color + header + Style.RESET_ALL
        spaces = ('.' * (self.n * 2)) + (' ' if self.n > 0 else '')
        print(header + spaces + message, file=out)

    def update_indentation(self, n):
        self.n += n

    def set_severity(self, severity):
        self.severity = severity


@comp.ssc_component('logger::null')
class NullLogger(LoggerContext):
    def log(self, level, severity, filename, line, message):
        pass


_instance = None


def init(name='logger::default', prop=None):
    """Initialize the logger subsystem"""
    global _instance
    _instance = comp.create(name, prop, interface=LoggerContext)


def shutdown():
    global _instance
    _instance = None


def initialized():
    return _instance is not None


def log(level, severity, filename, line, message):
    """Write a log message. Messages are dropped while the subsystem is not initialized."""
    if _instance is None:
        return
    _instance.log(level, severity, filename, line, message)


def _log_from_caller(level, message):
    if _instance is None:
        return
    frame = inspect.currentframe().f_back.f_back
    _instance.log(level, 0, frame.f_code.co_filename, frame.f_lineno, message)


def debug(message):
    _log_from_caller(LogLevel.Debug, message)


def info(message):
    _log_from_caller(LogLevel.Info, message)


def warn(message):
    _log_from_caller(LogLevel.Warn, message)


def error(message):
    _log_from_caller(LogLevel.Err, message)


def set_severity(severity):
    if _instance is not None:
        _instance.set_severity(severity)


def update_indentation(n):
    if _instance is not None:
        _instance.update_indentation(n)


@contextmanager
def LogIndenter():
    """Indents log messages written inside the context"""
    update_indentation(1)
    try:
        yield
    finally:
        update_indentation(-1)
