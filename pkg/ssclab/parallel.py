"""Parallel subsystem.

Work is distributed over a thread pool, but results always come back in input
order so that every reduction done by the caller is independent of the thread count.
"""
import os
from concurrent.futures import ThreadPoolExecutor
from . import comp
from .exception import ArgumentError


def default_num_threads():
    """Thread count from ``SSC_THREADS``, else 1"""
    value = os.environ.get('SSC_THREADS')
    if value is None:
        return 1
    try:
        n = int(value)
    except ValueError:
        raise ArgumentError('SSC_THREADS must be an integer [value=\'{}\']'.format(value))
    if n < 1:
        raise ArgumentError('SSC_THREADS must be >= 1 [value={}]'.format(n))
    return n


class ParallelContext(comp.Component):
    """Parallel executor interface"""
    def num_threads(self):
        raise NotImplementedError

    def foreach(self, items, process):
        raise NotImplementedError


@comp.ssc_component('parallel::default')
class DefaultParallel(ParallelContext):
    """Thread pool executor.

    Properties
    - ``num_threads``: number of worker threads. ``<= 0`` uses the number of CPUs.
    """
    def construct(self, prop):
        n = prop.get('num_threads', default_num_threads())
        if not isinstance(n, int):
            return False
        self.n = n if n > 0 else (os.cpu_count() or 1)
        return True

    def num_threads(self):
        return self.n

    def foreach(self, items, process):
        items = list(items)
        if self.n == 1 or len(items) <= 1:
            return [process(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.n) as executor:
            return list(executor.map(process, items))


_instance = None


def init(name='parallel::default', prop=None):
    global _instance
    _instance = comp.create(name, prop, interface=ParallelContext)


def shutdown():
    global _instance
    _instance = None


def num_threads():
    return 1 if _instance is None else _instance.num_threads()


def foreach(items, process):
    """Apply ``process`` to every item and return the results in input order"""
    if _instance is None:
        return [process(item) for item in items]
    return _instance.foreach(items, process)
