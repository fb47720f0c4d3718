"""Deterministic fan-out of independent grid points."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def _call(packed):
    func, args = packed
    return func(*args)


def map_ordered(func, arg_tuples, workers: int = 1) -> list:
    """Apply ``func`` to each argument tuple; results come back in input order."""
    arg_tuples = list(arg_tuples)
    if workers <= 1 or len(arg_tuples) <= 1:
        return [func(*args) for args in arg_tuples]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_call, [(func, args) for args in arg_tuples]))
