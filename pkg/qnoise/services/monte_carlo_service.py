import atexit
import logging
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterator, Optional, TypeVar

import numpy as np

from qnoise.config import Config, ExperimentConfig

logger = logging.getLogger(__name__)

T = TypeVar('T')
TrialFn = Callable[[int, np.random.Generator], T]


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for (seed, keys...), e.g. (master seed, trial index)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(keys)))


def derive_seed(seed: int, *keys: int) -> int:
    """Child master seed for a grid point, so each point owns its own trial streams."""
    state = np.random.SeedSequence(seed, spawn_key=tuple(keys)).generate_state(2, np.uint32)
    return int(state[0]) << 32 | int(state[1])


class MonteCarloService:
    """Runs independent trials on a thread pool and hands results back in trial order."""

    def __init__(self):
        self.app = None
        self.threads = self._resolve(Config.QNOISE_THREADS)
        self._executor: Optional[ThreadPoolExecutor] = None
        self._lock = threading.Lock()

    def init_app(self, app):
        """Initialize the Monte Carlo service with Flask app"""
        self.app = app
        self.configure(app.config.get('QNOISE_THREADS', 0))
        atexit.register(self.shutdown)
        logger.info(f"🎲 Monte Carlo service initialized with {self.threads} worker thread(s)")

    @staticmethod
    def _resolve(threads: int) -> int:
        return threads if threads and threads > 0 else (os.cpu_count() or 1)

    def configure(self, threads: int):
        """Set the worker count (0 = all cores); 1 keeps every trial in the calling thread."""
        with self._lock:
            resolved = self._resolve(threads)
            if resolved != self.threads and self._executor is not None:
                self._executor.shutdown(wait=True)
                self._executor = None
            self.threads = resolved

    def _get_executor(self) -> ThreadPoolExecutor:
        with self._lock:
            if self._executor is None:
                self._executor = ThreadPoolExecutor(max_workers=self.threads,
                                                    thread_name_prefix='qnoise-trial')
            return self._executor

    def map_trials(self, fn: TrialFn, n: int, seed: int,
                   batch_size: Optional[int] = None) -> Iterator[T]:
        """Yield fn(i, rng_i) for i in 0..n-1, in order, with rng_i = substream(seed, i).

        Trials are submitted in bounded batches so large runs never hold every result.
        """
        if self.threads == 1 or n <= 1:
            for i in range(n):
                yield fn(i, substream(seed, i))
            return

        executor = self._get_executor()
        batch = batch_size or self.threads * ExperimentConfig.TRIAL_BATCH_PER_THREAD
        for start in range(0, n, batch):
            futures = [executor.submit(fn, i, substream(seed, i))
                       for i in range(start, min(n, start + batch))]
            for future in futures:
                yield future.result()

    def shutdown(self):
        with self._lock:
            if self._executor is not None:
                self._executor.shutdown(wait=True)
                self._executor = None
                logger.info("🛑 Monte Carlo worker pool stopped")


# Global instance
monte_carlo_service = MonteCarloService()
