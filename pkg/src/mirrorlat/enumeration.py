"""Chunked mixed-radix enumeration of configuration spaces.

Exact expectations are exhaustive sums over ``base**slots`` configurations.
Configurations are visited in a fixed global order (slot 0 most significant)
in chunks, so reductions are deterministic and memory stays bounded.
"""
import numpy as np

ENUM_BUDGET = 1 << 26


class EnumerationBudgetError(ValueError):
    pass


def check_budget(base: int, slots: int, budget: int = ENUM_BUDGET) -> int:
    """Total count ``base**slots`` if within budget, else raises."""
    total = base ** slots
    if total > budget:
        raise EnumerationBudgetError(
            f"enumeration of {base}^{slots} = {total} configurations exceeds "
            f"the budget of 2^26 = {budget}"
        )
    return total


def digit_chunks(base: int, slots: int, chunk_size: int = 1 << 20):
    """Yields (start, digits) with ``digits`` of shape (m, slots) uint8.

    Power-of-two bases extract digits with shifts; other bases fall back to
    integer division.  Slot 0 is the most significant digit either way.
    """
    total = base ** slots
    bits = base.bit_length() - 1
    pow2 = base == 1 << bits
    if pow2:
        shifts = np.array([bits * (slots - 1 - k) for k in range(slots)], dtype=np.int64)
    else:
        weights = np.array([base ** (slots - 1 - k) for k in range(slots)], dtype=np.int64)
    for start in range(0, total, chunk_size):
        stop = min(start + chunk_size, total)
        idx = np.arange(start, stop, dtype=np.int64)
        # column-major: digits are read column-wise downstream
        digits = np.empty((stop - start, slots), dtype=np.uint8, order="F")
        if pow2:
            for k in range(slots):
                digits[:, k] = (idx >> shifts[k]) & (base - 1)
        else:
            for k in range(slots):
                digits[:, k] = (idx // weights[k]) % base
        yield start, digits
