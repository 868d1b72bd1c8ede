"""Fork-join evaluation of operator families.

Each candidate is computed independently by a pure function and results come
back in index order, so any reduction done afterwards is identical for every
worker count.
"""
import os
from concurrent.futures import ThreadPoolExecutor


def default_threads():
    env = os.environ.get("SOLVER_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"SOLVER_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ValueError("SOLVER_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


class StageExecutor:
    """Map a function over family indices with a barrier at the end."""

    def __init__(self, threads=1):
        self.threads = max(1, int(threads))
        self._pool = None

    def __enter__(self):
        if self.threads > 1:
            self._pool = ThreadPoolExecutor(max_workers=self.threads)
        return self

    def __exit__(self, *exc):
        self.close()

    def close(self):
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def map(self, fn, items):
        items = list(items)
        if self._pool is None or len(items) < 2:
            return [fn(item) for item in items]
        return list(self._pool.map(fn, items))


SERIAL = StageExecutor(1)
