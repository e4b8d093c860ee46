from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(func: Callable[[T], R], items: Iterable[T], threads: int = 1) -> List[R]:
    """
    Apply `func` to every item and return the results in input order.

    With threads <= 1 everything runs on the calling thread. Results never depend on
    the worker count as long as `func` only uses its own seeded state.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads, thread_name_prefix="vsl-worker") as pool:
        return list(pool.map(func, items))
