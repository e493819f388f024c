"""Progress reporter subsystem"""
import sys
from enum import Enum
from tqdm import tqdm
from . import comp


class ProgressMode(Enum):
    Samples = 'samples'
    Time = 'time'


class ProgressContext(comp.Component):
    """Progress reporter interface"""
    def start(self, mode, total, total_time):
        pass

    def update(self, processed):
        pass

    def update_time(self, elapsed):
        pass

    def end(self):
        pass


@comp.ssc_component('progress::null')
class NullProgress(ProgressContext):
    pass


@comp.ssc_component('progress::default')
class DefaultProgress(ProgressContext):
    """tqdm progress bar written to stderr"""
    def construct(self, prop):
        self.desc = prop.get('desc')
        return True

    def start(self, mode, total, total_time):
        self.mode = mode
        self.pbar = tqdm(
            total=total if mode == ProgressMode.Samples else total_time,
            desc=self.desc, file=sys.stderr, leave=False)

    def update(self, processed):
        self.pbar.update(max(0, processed - self.pbar.n))

    def update_time(self, elapsed):
        self.pbar.update(max(0, elapsed - self.pbar.n))

    def end(self):
        self.pbar.update(max(0, self.pbar.total - self.pbar.n))
        self.pbar.close()


_instance = None


def init(name='progress::default', prop=None):
    global _instance
    _instance = comp.create(name, prop, interface=ProgressContext)


def shutdown():
    global _instance
    _instance = None


def start(mode, total, total_time=0):
    if _instance is not None:
        _instance.start(mode, total, total_time)


def update(processed):
    if _instance is not None:
        _instance.update(processed)


def update_time(elapsed):
    if _instance is not None:
        _instance.update_time(elapsed)


def end():
    if _instance is not None:
        _instance.end()
