"""Parallel evaluation of independent grid samples."""
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, List, Optional, Sequence, TypeVar

from src.config import config

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def sample_workers(workers: Optional[int] = None) -> int:
    """Thread count for sample-level parallelism (``--threads`` / BLOWUPLAB_THREADS)."""
    return config.get_threads(workers)


def map_samples(fn: Callable[[T], R], items: Sequence[T], workers: Optional[int] = None,
                label: str = "samples") -> List[R]:
    """Apply fn to every item, in parallel when workers > 1.

    Results come back in input order. Each sample is computed independently,
    so the output does not depend on the thread count. The first exception
    raised by a sample propagates after all submitted samples finish.
    """
    n_workers = sample_workers(workers)
    results: List[Optional[R]] = [None] * len(items)
    if n_workers <= 1 or len(items) <= 1:
        for k, item in enumerate(items):
            results[k] = fn(item)
            logger.info("%s: %d/%d done", label, k + 1, len(items))
        return results

    errors = {}
    with ThreadPoolExecutor(max_workers=n_workers) as executor:
        future_to_index = {executor.submit(fn, item): k for k, item in enumerate(items)}
        completed = 0
        for future in as_completed(future_to_index):
            index = future_to_index[future]
            try:
                results[index] = future.result()
                completed += 1
                logger.info("%s: %d/%d done", label, completed, len(items))
            except Exception as e:
                logger.error("%s: sample %d failed: %s", label, index, e)
                errors[index] = e
    if errors:
        raise errors[min(errors)]
    return results
