"""Segmented prime generation over [lo, hi], optionally restricted to a residue class.

The sieve marks the full interval and filters by residue afterwards: residue
filtering is a single vectorized modulo over each segment, and the scanner
typically wants many residues of the same modulus from one pass anyway.
"""

from __future__ import annotations

import math
import os
import struct
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

MAX_SIEVE_BOUND = (1 << 63) - 1
DEFAULT_SEGMENT_LENGTH = 1 << 22


@dataclass(frozen=True)
class ResidueClass:
    """Arithmetic progression r + nq with gcd(q, r) = 1 and 1 <= r < q."""

    q: int
    r: int

    def __post_init__(self) -> None:
        if self.q < 2:
            raise ValueError("modulus q must be at least 2")
        if not 1 <= self.r < self.q:
            raise ValueError("residue must satisfy 1 <= r < q")
        if math.gcd(self.q, self.r) != 1:
            raise ValueError(f"gcd({self.q}, {self.r}) != 1: class holds at most one prime")

    @classmethod
    def unchecked(cls, q: int, r: int) -> "ResidueClass":
        """Bypass validation (progressions of gap sizes may have r = 0 or gcd > 1)."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "q", q)
        object.__setattr__(obj, "r", r)
        return obj

    def __str__(self) -> str:  # compact form for messages and file names
        return f"{self.r} mod {self.q}"


@dataclass(frozen=True)
class PrimeSegment:
    """Ordered primes found in [lo, hi] (both inclusive)."""

    lo: int
    hi: int
    primes: np.ndarray


def base_primes(limit: int) -> np.ndarray:
    """All primes <= limit via a monolithic sieve of Eratosthenes."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.flatnonzero(mask).astype(np.int64)


def _check_range(lo: int, hi: int) -> None:
    if lo < 1 or hi < lo:
        raise ValueError("need 1 <= lo <= hi")
    if hi > MAX_SIEVE_BOUND:
        raise OverflowError("sieve bound exceeds 2^63 - 1")


def sieve_interval(lo: int, hi: int, base: Optional[np.ndarray] = None) -> np.ndarray:
    """Primes in [lo, hi] as an int64 array."""
    _check_range(lo, hi)
    if base is None:
        base = base_primes(math.isqrt(hi))
    mask = np.ones(hi - lo + 1, dtype=bool)
    if lo == 1:
        mask[0] = False
    for p in base:
        p = int(p)
        if p * p > hi:
            break
        start = max(p * p, ((lo + p - 1) // p) * p)
        if start > hi:
            continue
        mask[start - lo :: p] = False
    return (np.flatnonzero(mask) + lo).astype(np.int64)


def _segment_bounds(lo: int, hi: int, seg_len: int) -> list[tuple[int, int]]:
    return [(a, min(a + seg_len - 1, hi)) for a in range(lo, hi + 1, seg_len)]


def iter_prime_segments(
    lo: int,
    hi: int,
    *,
    seg_len: int = DEFAULT_SEGMENT_LENGTH,
    threads: int = 1,
) -> Iterator[PrimeSegment]:
    """Stream PrimeSegments covering [lo, hi] in order.

    threads > 1 sieves segments concurrently but always yields them in
    ascending order, so every consumer sees the same deterministic stream.
    """
    _check_range(lo, hi)
    if seg_len < 2:
        raise ValueError("segment length too small")
    base = base_primes(math.isqrt(hi))
    bounds = _segment_bounds(lo, hi, seg_len)
    if threads <= 1 or len(bounds) == 1:
        for a, b in bounds:
            yield PrimeSegment(a, b, sieve_interval(a, b, base))
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        pending: deque = deque()
        it = iter(bounds)
        for _ in range(min(len(bounds), threads + 2)):
            a, b = next(it)
            pending.append((a, b, pool.submit(sieve_interval, a, b, base)))
        while pending:
            a, b, fut = pending.popleft()
            arr = fut.result()
            nxt = next(it, None)
            if nxt is not None:
                pending.append((nxt[0], nxt[1], pool.submit(sieve_interval, nxt[0], nxt[1], base)))
            yield PrimeSegment(a, b, arr)


def iter_class_segments(
    cls: ResidueClass,
    lo: int,
    hi: int,
    *,
    seg_len: int = DEFAULT_SEGMENT_LENGTH,
    threads: int = 1,
    cache_dir: Optional[str] = None,
) -> Iterator[PrimeSegment]:
    """Stream segments holding only primes p ≡ r (mod q), p in [lo, hi]."""
    if cache_dir is not None:
        yield from _iter_class_segments_cached(cls, lo, hi, seg_len=seg_len,
                                               threads=threads, cache_dir=cache_dir)
        return
    for seg in iter_prime_segments(lo, hi, seg_len=seg_len, threads=threads):
        pr = seg.primes
        yield PrimeSegment(seg.lo, seg.hi, pr[pr % cls.q == cls.r])


def primes_in_class(
    cls: ResidueClass,
    lo: int,
    hi: int,
    *,
    seg_len: int = DEFAULT_SEGMENT_LENGTH,
    threads: int = 1,
    cache_dir: Optional[str] = None,
) -> Iterator[int]:
    """Ordered stream of primes in the class, as Python ints."""
    for seg in iter_class_segments(cls, lo, hi, seg_len=seg_len, threads=threads,
                                   cache_dir=cache_dir):
        for p in seg.primes.tolist():
            yield p


def prime_count(cls: ResidueClass, x: int, *, threads: int = 1) -> int:
    """pi(x; q, r): number of primes <= x in the class."""
    if x < 1:
        raise ValueError("x must be positive")
    total = 0
    for seg in iter_class_segments(cls, 1, x, threads=threads):
        total += len(seg.primes)
    return total


def count_all_primes(x: int, *, threads: int = 1) -> int:
    """pi(x) over all primes."""
    if x < 1:
        return 0
    return sum(len(seg.primes) for seg in iter_prime_segments(1, x, threads=threads))


def residue_counts(q: int, x: int, *, threads: int = 1) -> np.ndarray:
    """Counts of primes <= x in every residue class mod q (index = residue)."""
    if q < 1 or x < 1:
        raise ValueError("need q >= 1 and x >= 1")
    counts = np.zeros(q, dtype=np.int64)
    for seg in iter_prime_segments(1, x, threads=threads):
        if len(seg.primes):
            counts += np.bincount(seg.primes % q, minlength=q)
    return counts


# ---------------------------------------------------------------------------
# Optional binary segment cache.
#
# Layout: 8-byte magic, then version, q, lo, hi, count as little-endian
# unsigned 64-bit words, then the primes delta-encoded as LEB128 varints
# (first delta is taken from lo). Purely an optimization: results are
# identical with the cache disabled.

CACHE_MAGIC = b"APGSIEVE"
CACHE_VERSION = 1


def _encode_varint(value: int, out: bytearray) -> None:
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return


def _decode_varints(buf: bytes, count: int) -> np.ndarray:
    values = np.empty(count, dtype=np.int64)
    pos = 0
    for i in range(count):
        shift = 0
        acc = 0
        while True:
            byte = buf[pos]
            pos += 1
            acc |= (byte & 0x7F) << shift
            if not byte & 0x80:
                break
            shift += 7
        values[i] = acc
    if pos != len(buf):
        raise ValueError("trailing bytes in cache payload")
    return values


def write_segment_cache(path: str, q: int, lo: int, hi: int, primes: np.ndarray) -> None:
    """Persist one sieved segment; see the format note above."""
    primes = np.asarray(primes, dtype=np.int64)
    payload = bytearray()
    prev = lo
    for p in primes.tolist():
        _encode_varint(p - prev, payload)
        prev = p
    header = CACHE_MAGIC + struct.pack("<QQQQQ", CACHE_VERSION, q, lo, hi, len(primes))
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(payload)
    os.replace(tmp, path)


def read_segment_cache(path: str) -> tuple[int, int, int, np.ndarray]:
    """Load a cached segment, returning (q, lo, hi, primes)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:8] != CACHE_MAGIC:
        raise ValueError(f"{path}: not a segment cache file")
    version, q, lo, hi, count = struct.unpack("<QQQQQ", raw[8:48])
    if version != CACHE_VERSION:
        raise ValueError(f"{path}: unsupported cache version {version}")
    deltas = _decode_varints(raw[48:], count)
    primes = np.cumsum(deltas) + lo if count else np.empty(0, dtype=np.int64)
    return q, lo, hi, primes.astype(np.int64)


def _iter_class_segments_cached(
    cls: ResidueClass,
    lo: int,
    hi: int,
    *,
    seg_len: int,
    threads: int,
    cache_dir: str,
) -> Iterator[PrimeSegment]:
    os.makedirs(cache_dir, exist_ok=True)
    bounds = _segment_bounds(lo, hi, seg_len)
    missing = []
    for a, b in bounds:
        if not os.path.exists(_cache_path(cache_dir, cls, a, b)):
            missing.append((a, b))
    if missing:
        # one sieving pass fills every hole; holes are contiguous in practice
        todo = set(missing)
        base = base_primes(math.isqrt(hi))
        for a, b in bounds:
            if (a, b) in todo:
                pr = sieve_interval(a, b, base)
                pr = pr[pr % cls.q == cls.r]
                write_segment_cache(_cache_path(cache_dir, cls, a, b), cls.q, a, b, pr)
    for a, b in bounds:
        q, clo, chi, primes = read_segment_cache(_cache_path(cache_dir, cls, a, b))
        if (q, clo, chi) != (cls.q, a, b):
            raise ValueError("cache header does not match requested segment")
        yield PrimeSegment(a, b, primes)


def _cache_path(cache_dir: str, cls: ResidueClass, lo: int, hi: int) -> str:
    return os.path.join(cache_dir, f"q{cls.q}_r{cls.r}_{lo}_{hi}.seg")
