"""Segmented prime generation and exact pi / theta / psi evaluation.

Counts are exact integers.  Theta is accumulated in double-double, so the
absolute error after pi(x) terms stays below ``theta_error_bound(x)``, i.e.
a handful of units in the 106th bit times the number of terms.

Everything above small ranges is organised in *pieces*: half-open intervals
cut at a fixed absolute grid (and at checkpoint positions).  Pieces are
sieved independently, possibly on several threads, and reduced in ascending
order, so results do not depend on the worker count.
"""

from __future__ import annotations

import math
import os
import struct
import threading
import zlib
from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import _sieve_kernels as K
from ._dd import dd_log
from .errors import CorruptCheckpoint, DomainError, MissingCheckpoint, RangeTooLarge

# floats carry primes exactly up to here, which the dd kernels rely on
SIEVE_MAX = 2**53
DEFAULT_SEGMENT = 1 << 20  # odd entries per segment (1 MiB of flags)
PIECE_SPAN = 1 << 27  # integers per reduction piece

CHECKPOINT_MAGIC = b"EPBC"
CHECKPOINT_VERSION = 1
_HEADER = struct.Struct("<4sIQ")
_RECORD = struct.Struct("<QQddddI")
_RECORD_BODY = struct.Struct("<QQdddd")


# ---------------------------------------------------------------------------
# double-double scalar


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@dataclass(frozen=True)
class HighPrecisionSum:
    """Unevaluated sum ``hi + lo`` of two binary64 numbers.

    Always stored renormalised (``|lo| <= ulp(hi)/2``).  Supports ``+`` with
    floats and other sums; ``float(s)`` rounds to nearest.
    """

    hi: float = 0.0
    lo: float = 0.0

    @classmethod
    def of(cls, hi, lo=0.0):
        s, e = _two_sum(float(hi), float(lo))
        return cls(s, e)

    def __float__(self):
        return self.hi + self.lo

    def __add__(self, other):
        if isinstance(other, HighPrecisionSum):
            s, e = _two_sum(self.hi, other.hi)
            t, f = _two_sum(self.lo, other.lo)
            e += t
            s, e = _two_sum(s, e)
            e += f
            return HighPrecisionSum.of(s, e)
        if isinstance(other, (int, float)):
            s, e = _two_sum(self.hi, float(other))
            return HighPrecisionSum.of(s, e + self.lo)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return HighPrecisionSum(-self.hi, -self.lo)

    def __sub__(self, other):
        if isinstance(other, (HighPrecisionSum, int, float)):
            return self + (-other)
        return NotImplemented

    def __lt__(self, other):
        d = self - other
        return d.hi < 0 or (d.hi == 0 and d.lo < 0)

    def __le__(self, other):
        d = self - other
        return d.hi < 0 or (d.hi == 0 and d.lo <= 0)

    def as_fraction(self):
        from fractions import Fraction

        return Fraction(self.hi) + Fraction(self.lo)


ZERO = HighPrecisionSum()


def theta_error_bound(x, pi=None):
    """Documented accumulation error bound for theta(x): 4*ulp_106(theta)*pi(x).

    ``pi`` defaults to a crude overestimate 1.26 x/log x when not supplied.
    """
    if x < 2:
        return 0.0
    if pi is None:
        pi = 1.26 * x / math.log(x) + 1
    theta_scale = max(float(x), 2.0)
    ulp106 = 2.0 ** (math.floor(math.log2(theta_scale)) - 105)
    return 4.0 * ulp106 * pi


# ---------------------------------------------------------------------------
# base primes


_base_lock = threading.Lock()
_base_cache = np.empty(0, dtype=np.int64)
_base_limit = 0


def _simple_sieve(limit):
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for i in range(3, math.isqrt(limit) + 1, 2):
        if flags[i]:
            flags[i * i :: 2 * i] = False
    return np.flatnonzero(flags).astype(np.int64)


def base_primes(limit):
    """Odd primes <= limit (cached; grows on demand)."""
    global _base_cache, _base_limit
    with _base_lock:
        if limit > _base_limit:
            new_limit = max(limit, 2 * _base_limit, 1 << 16)
            p = _simple_sieve(new_limit)
            _base_cache = p[p > 2]
            _base_limit = new_limit
        cache = _base_cache
    return cache[: np.searchsorted(cache, limit, side="right")]


def _check_range(lo, hi):
    if hi > SIEVE_MAX:
        raise RangeTooLarge(f"hi={hi} exceeds the supported maximum {SIEVE_MAX}")
    if lo < 0:
        raise DomainError("lo must be non-negative")


def _odd_start(lo):
    lo = max(lo, 3)
    return lo if lo % 2 else lo + 1


def _seg_for(lo, hi, segment_size):
    return int(max(1, min(segment_size, (hi - lo) // 2 + 1)))


# ---------------------------------------------------------------------------
# segments and prime streams


@dataclass
class Segment:
    """Sieved odd integers of ``[lo, hi)``; ``flags[i]`` is for ``lo' + 2i``.

    ``lo'`` is the first odd number >= lo.  The prime 2 is not part of the
    bitset; ``primes()`` adds it back when it lies in range.
    """

    lo: int
    hi: int
    flags: np.ndarray = field(repr=False)

    @property
    def odd_lo(self):
        return self.lo if self.lo % 2 else self.lo + 1

    def primes(self):
        idx = np.flatnonzero(self.flags).astype(np.int64)
        out = self.odd_lo + 2 * idx
        if self.lo <= 2 < self.hi:
            out = np.concatenate(([2], out))
        return out


def sieve_segment(lo, hi, segment_size=DEFAULT_SEGMENT):
    """Sieve a single segment ``[lo, hi)`` with ``hi - lo <= 2*segment_size``."""
    if hi <= lo:
        raise DomainError("hi must exceed lo")
    if hi - lo > 2 * segment_size:
        raise DomainError("range wider than one segment")
    _check_range(lo, hi)
    olo = lo if lo % 2 else lo + 1
    n = max(0, (hi - olo + 1) // 2)
    flags = np.zeros(n, dtype=np.uint8)
    if n:
        base = base_primes(math.isqrt(hi) + 1)
        start = max(olo, 1)
        offsets, nb = K.init_offsets(start, hi, base)
        K.fill_segment(flags, start, n, base, offsets, nb, K.PATTERN)
    return Segment(lo, hi, flags)


def primes_in_range(lo, hi, segment_size=DEFAULT_SEGMENT):
    """All primes in ``[lo, hi)`` as an int64 array."""
    _check_range(lo, hi)
    if hi <= max(lo, 2):
        return np.empty(0, dtype=np.int64)
    olo = _odd_start(lo)
    parts = []
    if lo <= 2 < hi:
        parts.append(np.array([2], dtype=np.int64))
    if olo < hi:
        base = base_primes(math.isqrt(hi) + 1)
        width = hi - olo
        # generous capacity: pi(b) - pi(a) < 2*w/log(w) + small
        cap = int(1.3 * width / max(math.log(max(olo, 17)), 1.0) + 2 * width / max(math.log(max(width, 17)), 1.0)) + 64
        cap = min(cap, width // 2 + 2)
        parts.append(K.list_primes(olo, hi, base, _seg_for(olo, hi, segment_size), K.PATTERN, cap))
    if not parts:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(parts) if len(parts) > 1 else parts[0]


def prime_array_blocks(lo, hi, span=1 << 24, segment_size=DEFAULT_SEGMENT):
    """Yield int64 arrays of the primes in ``[lo, hi)``, block by block."""
    _check_range(lo, hi)
    a = lo
    while a < hi:
        b = min(hi, a + span)
        arr = primes_in_range(a, b, segment_size)
        if arr.size:
            yield arr
        a = b


def iterate_primes(lo, hi, segment_size=DEFAULT_SEGMENT) -> Iterator[int]:
    """Yield the primes of ``[lo, hi)`` in increasing order as Python ints.

    Raises:
        RangeTooLarge: if ``hi`` exceeds ``SIEVE_MAX``.
    """
    if lo < 2 or hi <= lo:
        raise DomainError("need 2 <= lo < hi")
    _check_range(lo, hi)
    for arr in prime_array_blocks(lo, hi, segment_size=segment_size):
        yield from arr.tolist()


# ---------------------------------------------------------------------------
# counting and theta over a range


def _piece(a, b, segment_size):
    """(count, theta_hi, theta_lo) for primes in ``[a, b)``."""
    count = 0
    th, tl = 0.0, 0.0
    if a <= 2 < b:
        count = 1
        th, tl = dd_log(2.0, 0.0)
    olo = _odd_start(a)
    if olo < b:
        base = base_primes(math.isqrt(b) + 1)
        c, h, l = K.count_theta(olo, b, base, _seg_for(olo, b, segment_size), K.PATTERN)
        count += c
        s = HighPrecisionSum.of(th, tl) + HighPrecisionSum(h, l)
        th, tl = s.hi, s.lo
    return count, th, tl


def _piece_bounds(lo, hi, cuts=()):
    """Split ``[lo, hi)`` at the absolute PIECE_SPAN grid and extra cut points."""
    pts = {lo, hi}
    g = (lo // PIECE_SPAN + 1) * PIECE_SPAN
    while g < hi:
        pts.add(g)
        g += PIECE_SPAN
    pts.update(c for c in cuts if lo < c < hi)
    pts = sorted(pts)
    return list(zip(pts[:-1], pts[1:]))


def _run_pieces(pieces, segment_size, workers):
    if workers <= 1 or len(pieces) < 2:
        for a, b in pieces:
            yield _piece(a, b, segment_size)
        return
    with ThreadPoolExecutor(max_workers=workers) as ex:
        # map keeps submission order: reduction order is fixed
        yield from ex.map(lambda ab: _piece(ab[0], ab[1], segment_size), pieces)


def count_theta_range(lo, hi, segment_size=DEFAULT_SEGMENT, workers=1):
    """Number of primes and theta-increment over ``[lo, hi)``."""
    _check_range(lo, hi)
    if hi <= lo:
        return 0, ZERO
    count = 0
    total = ZERO
    for c, h, l in _run_pieces(_piece_bounds(lo, hi), segment_size, workers):
        count += c
        total = total + HighPrecisionSum(h, l)
    return count, total


# ---------------------------------------------------------------------------
# checkpoints


@dataclass(frozen=True)
class PrimeCheckpoint:
    """Exact pi(x) together with theta(x) (and psi(x)) in double-double."""

    x: int
    pi: int
    theta: HighPrecisionSum
    psi: HighPrecisionSum | None = None

    def pack(self):
        psi = self.psi if self.psi is not None else HighPrecisionSum(math.nan, math.nan)
        body = _RECORD_BODY.pack(self.x, self.pi, self.theta.hi, self.theta.lo, psi.hi, psi.lo)
        return body + struct.pack("<I", zlib.crc32(body))

    @classmethod
    def unpack(cls, buf):
        body = buf[: _RECORD_BODY.size]
        (crc,) = struct.unpack("<I", buf[_RECORD_BODY.size : _RECORD.size])
        if zlib.crc32(body) != crc:
            raise CorruptCheckpoint("record checksum mismatch")
        x, pi, th, tl, sh, sl = _RECORD_BODY.unpack(body)
        psi = None if math.isnan(sh) else HighPrecisionSum(sh, sl)
        return cls(x, pi, HighPrecisionSum(th, tl), psi)


def read_checkpoints(path):
    """Load and integrity-check a checkpoint file. Returns (step, records)."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except FileNotFoundError as exc:
        raise MissingCheckpoint(str(path)) from exc
    if len(data) < _HEADER.size:
        raise CorruptCheckpoint("file shorter than header")
    magic, version, step = _HEADER.unpack_from(data, 0)
    if magic != CHECKPOINT_MAGIC:
        raise CorruptCheckpoint("bad magic")
    if version != CHECKPOINT_VERSION:
        raise CorruptCheckpoint(f"unsupported version {version}")
    body = data[_HEADER.size :]
    if len(body) % _RECORD.size:
        raise CorruptCheckpoint("truncated record at end of file")
    recs = []
    for off in range(0, len(body), _RECORD.size):
        r = PrimeCheckpoint.unpack(body[off : off + _RECORD.size])
        if recs and r.x <= recs[-1].x:
            raise CorruptCheckpoint("checkpoints not strictly increasing")
        if step and r.x % step:
            raise CorruptCheckpoint(f"x={r.x} is not a multiple of step {step}")
        recs.append(r)
    return step, recs


def write_checkpoints(path, step, records):
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, step))
        for r in records:
            fh.write(r.pack())


def export_csv(records: Iterable[PrimeCheckpoint], out):
    """Write checkpoints as CSV; theta/psi rendered with 20 significant digits."""
    from decimal import Decimal, getcontext

    getcontext().prec = 40

    def fmt(s):
        if s is None:
            return ""
        v = Decimal(s.hi) + Decimal(s.lo)
        return format(v, ".20g")

    out.write("x,pi,theta,psi\n")
    for r in records:
        out.write(f"{r.x},{r.pi},{fmt(r.theta)},{fmt(r.psi)}\n")


class _PsiExtra:
    """psi(x) - theta(x) = sum over prime powers p^k <= x with k >= 2 of log p."""

    def __init__(self, x_max):
        root = math.isqrt(x_max)
        ps = base_primes(max(root, 3))
        ps = np.concatenate(([2], ps[ps <= root])).astype(np.int64)
        powers = []
        logs = []
        for p in ps.tolist():
            lh, ll = dd_log(float(p), 0.0)
            q = p * p
            while q <= x_max:
                powers.append(q)
                logs.append((lh, ll))
                q *= p
        order = np.argsort(np.array(powers, dtype=np.int64), kind="stable")
        self.powers = np.array(powers, dtype=np.int64)[order]
        cum = []
        acc = ZERO
        for i in order.tolist():
            acc = acc + HighPrecisionSum(*logs[i])
            cum.append(acc)
        self.cum = cum

    def at(self, x):
        i = int(np.searchsorted(self.powers, x, side="right"))
        return self.cum[i - 1] if i else ZERO


def psi_from_theta(x, theta):
    return theta + _PsiExtra(x).at(x)


def checkpoint_run(
    x_max: int,
    step: int,
    resume_from=None,
    path=None,
    workers: int = 1,
    segment_size: int = DEFAULT_SEGMENT,
    progress=None,
    stop_event: threading.Event | None = None,
) -> list[PrimeCheckpoint]:
    """Sieve up to ``x_max`` emitting a checkpoint at every multiple of ``step``.

    Args:
        x_max: last integer covered; checkpoints at ``step, 2*step, ... <= x_max``.
        step: checkpoint spacing (>= 1).
        resume_from: existing checkpoint file to continue (same step).
        path: file to write; when resuming and ``path`` is None the resume
            file is extended in place.  Records are flushed as they complete.
        workers: threads used for sieving pieces.  Output is bit-identical
            for any value.
        progress: optional callable ``(x_done, x_max)``.
        stop_event: when set, the run stops after the next completed record,
            leaving a valid file behind.

    Returns:
        All checkpoints (resumed ones included), in increasing x.

    Raises:
        CorruptCheckpoint: resume file fails its integrity check or uses a
            different step.
    """
    if step < 1:
        raise DomainError("step must be >= 1")
    _check_range(1, x_max + 1)
    records: list[PrimeCheckpoint] = []
    if resume_from is not None:
        fstep, records = read_checkpoints(resume_from)
        if fstep != step:
            raise CorruptCheckpoint(f"resume file has step {fstep}, requested {step}")
        if path is None:
            path = resume_from
    start_x = records[-1].x if records else 0
    pi = records[-1].pi if records else 0
    theta = records[-1].theta if records else ZERO
    targets = list(range((start_x // step + 1) * step, x_max + 1, step))
    if not targets:
        return records

    psi_extra = _PsiExtra(targets[-1])
    fh = None
    if path is not None:
        if records and os.path.exists(path) and os.path.samefile(path, resume_from):
            fh = open(path, "ab")
        else:
            fh = open(path, "wb")
            fh.write(_HEADER.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, step))
            for r in records:
                fh.write(r.pack())
    try:
        # pieces end right after each target, so each checkpoint is a prefix sum
        cuts = [t + 1 for t in targets]
        pieces = _piece_bounds(start_x + 1, targets[-1] + 1, cuts)
        ti = 0
        for (a, b), (c, h, l) in zip(pieces, _run_pieces(pieces, segment_size, workers)):
            pi += c
            theta = theta + HighPrecisionSum(h, l)
            if b - 1 == targets[ti]:
                x = targets[ti]
                rec = PrimeCheckpoint(x, pi, theta, theta + psi_extra.at(x))
                records.append(rec)
                if fh is not None:
                    fh.write(rec.pack())
                    fh.flush()
                ti += 1
                if progress is not None:
                    progress(x, x_max)
                if stop_event is not None and stop_event.is_set():
                    break
    finally:
        if fh is not None:
            fh.close()
    return records


# ---------------------------------------------------------------------------
# point queries


def _as_records(checkpoints) -> Sequence[PrimeCheckpoint]:
    if checkpoints is None:
        return ()
    if isinstance(checkpoints, (str, os.PathLike)):
        return read_checkpoints(checkpoints)[1]
    return checkpoints


def _nearest(records, x):
    xs = [r.x for r in records]
    i = bisect_right(xs, x)
    return records[i - 1] if i else None


def state_at(x, checkpoints=None, segment_size=DEFAULT_SEGMENT, workers=1):
    """(pi(x), theta(x)) resuming from the nearest checkpoint at or below x."""
    x = int(math.floor(x))
    if x < 2:
        return 0, ZERO
    cp = _nearest(_as_records(checkpoints), x)
    pi0, th0, x0 = (cp.pi, cp.theta, cp.x) if cp is not None else (0, ZERO, 0)
    c, t = count_theta_range(x0 + 1, x + 1, segment_size, workers)
    return pi0 + c, th0 + t


def theta_at(x, checkpoints=None, **kw) -> HighPrecisionSum:
    """theta(x) = sum of log p over primes p <= x, as a double-double."""
    return state_at(x, checkpoints, **kw)[1]


def pi_at(x, checkpoints=None, **kw) -> int:
    """Exact number of primes <= x."""
    return state_at(x, checkpoints, **kw)[0]


def psi_at(x, checkpoints=None, **kw) -> HighPrecisionSum:
    """psi(x) = sum of log p over prime powers p^k <= x."""
    x = int(math.floor(x))
    if x < 2:
        return ZERO
    return psi_from_theta(x, theta_at(x, checkpoints, **kw))


# ---------------------------------------------------------------------------
# streaming with running pi / theta, used by the sweeps


@dataclass
class PrimeBlock:
    """Consecutive primes with pi(p) and (optionally) theta(p) at each one."""

    primes: np.ndarray
    pi: np.ndarray
    theta_hi: np.ndarray | None = None
    theta_lo: np.ndarray | None = None

    @property
    def theta(self):
        return self.theta_hi + self.theta_lo


@dataclass
class Sieve:
    """Prime data source shared by the verification engines.

    Holds sieve settings plus optional checkpoints, so that ranges far from
    the origin can start from a stored (pi, theta) instead of sieving from 2.
    """

    checkpoints: Sequence[PrimeCheckpoint] = ()
    segment_size: int = DEFAULT_SEGMENT
    workers: int = 1
    block_span: int = 1 << 25
    cache_below: int = 0
    _cache: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False, compare=False)

    @classmethod
    def from_file(cls, path, **kw):
        return cls(checkpoints=read_checkpoints(path)[1], **kw)

    def _cached(self):
        # primes <= cache_below, sieved once and shared by every query
        with self._lock:
            if self._cache is None:
                self._cache = primes_in_range(2, self.cache_below + 1, self.segment_size)
                self._cache.setflags(write=False)
            return self._cache

    def state_at(self, x):
        return state_at(x, self.checkpoints, self.segment_size, self.workers)

    def pi_at(self, x):
        x = int(math.floor(x))
        if 0 < x <= self.cache_below:
            return int(np.searchsorted(self._cached(), x, side="right"))
        return self.state_at(x)[0]

    def theta_at(self, x):
        return self.state_at(x)[1]

    def primes(self, lo, hi):
        """Primes in ``[lo, hi)``."""
        if self.cache_below and hi - 1 <= self.cache_below:
            c = self._cached()
            return c[np.searchsorted(c, lo):np.searchsorted(c, hi)]
        return primes_in_range(lo, hi, self.segment_size)

    def blocks(self, lo, hi, with_theta=False, with_pi=True) -> Iterator[PrimeBlock]:
        """Primes of ``[lo, hi)`` in blocks, carrying running pi and theta."""
        if with_pi or with_theta:
            pi0, th0 = self.state_at(lo - 1)
        else:
            pi0, th0 = 0, ZERO
        for arr in prime_array_blocks(lo, hi, self.block_span, self.segment_size):
            pis = pi0 + np.arange(1, arr.size + 1, dtype=np.int64)
            pi0 += arr.size
            if with_theta:
                h, l = K.theta_cumulative(arr, th0.hi, th0.lo)
                th0 = HighPrecisionSum(h[-1], l[-1])
                yield PrimeBlock(arr, pis, h, l)
            else:
                yield PrimeBlock(arr, pis)
