"""Allocator tuning for long batched evaluations.

Chunked field evaluation allocates and frees the same multi-megabyte
temporaries thousands of times.  glibc hands such blocks back to the kernel
on free, so every chunk pays for fresh zeroed pages.  Raising the trim and
mmap thresholds keeps those pages in the heap.  This is process-wide, so the
library never does it on import; the CLI and the test session opt in.
"""
from __future__ import annotations

import ctypes
import ctypes.util
import sys

_M_TRIM_THRESHOLD = -1
_M_MMAP_THRESHOLD = -3
_LIMIT = 1 << 30

_done = False


def keep_heap() -> bool:
    """Best effort; returns whether glibc accepted the new thresholds."""
    global _done
    if _done:
        return True
    if not sys.platform.startswith("linux"):
        return False
    name = ctypes.util.find_library("c")
    if name is None:
        return False
    try:
        libc = ctypes.CDLL(name)
        ok = libc.mallopt(_M_TRIM_THRESHOLD, _LIMIT) == 1 and libc.mallopt(_M_MMAP_THRESHOLD, _LIMIT) == 1
    except (OSError, AttributeError):
        return False
    _done = ok
    return ok
