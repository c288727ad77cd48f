import logging
from typing import Any, Callable, Iterable, Sequence, TypeVar

import numpy as np
from joblib import Parallel, delayed
from tqdm.auto import tqdm

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

T = TypeVar("T")


def child_seeds(seed: int, n: int) -> list[np.random.SeedSequence]:
    """Independent per-task seeds; task i gets the same stream whatever the worker count."""
    return np.random.SeedSequence(seed).spawn(n)


def run_parallel(
    task: Callable[..., T],
    arguments: Sequence[tuple[Any, ...]],
    jobs: int = 1,
    progress: str | None = None,
) -> list[T]:
    """
    Run `task(*args)` for every tuple in `arguments` and return results in input order.

    jobs == 1 runs in-process; otherwise the calls go to a joblib process pool.
    """
    items: Iterable[tuple[Any, ...]] = arguments
    if progress:
        items = tqdm(arguments, desc=progress, leave=False)
    if jobs == 1 or len(arguments) < 2:
        return [task(*args) for args in items]
    logger.info(f"🚀 Dispatching {len(arguments)} {task.__name__} tasks over {jobs} workers")
    return Parallel(n_jobs=jobs)(delayed(task)(*args) for args in items)
