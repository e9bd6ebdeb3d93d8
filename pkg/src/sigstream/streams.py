"""Piecewise-linear streams and their signatures.

A stream is a timestamped sequence of points in R^d, read as the piecewise
linear path through them.  Signatures are computed exactly (up to rounding)
as the ordered product of per-segment exponentials, via Chen's identity.
Also provides CSV ingestion, the canonical time-augmentation and lead-lag
transforms, and a computable lower-bound profile for the p-variation
signature metric.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import lie_algebra
from .errors import DimensionMismatchError, DomainError, StreamParseError
from .tensor_algebra import TruncatedTensor, tensor_log

__all__ = [
    "Stream",
    "PartitionDistanceReport",
    "ingest_csv",
    "write_csv",
    "time_augment",
    "lead_lag",
    "concat",
    "reverse",
    "restrict",
    "signature",
    "log_signature",
    "dp_distance_estimate",
]

# prefix arrays above this size fall back to the per-segment loop
_VECTOR_BUDGET = 2**24


class Stream:
    """Timestamped samples of a d-dimensional path, piecewise-linear in between."""

    __slots__ = ("times", "points")

    def __init__(self, times, points):
        times = np.asarray(times, dtype=float).reshape(-1).copy()
        points = np.asarray(points, dtype=float).copy()
        if points.ndim == 1:
            points = points[:, None]
        if points.ndim != 2 or points.shape[0] != times.size:
            raise DimensionMismatchError(
                f"need one point per timestamp, got {points.shape} for {times.size} times"
            )
        if times.size < 1:
            raise DomainError("a stream needs at least one sample")
        if not np.all(np.isfinite(times)) or not np.all(np.isfinite(points)):
            raise DomainError("stream samples must be finite")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise DomainError("timestamps must be strictly increasing")
        times.flags.writeable = False
        points.flags.writeable = False
        self.times = times
        self.points = points

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def n_samples(self) -> int:
        return self.times.size

    @property
    def interval(self) -> tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])

    def increments(self) -> np.ndarray:
        return np.diff(self.points, axis=0)

    def total_variation(self, flavor: str = "l2") -> float:
        """Length of the polygonal path under the chosen vector norm."""
        inc = self.increments()
        if inc.size == 0:
            return 0.0
        if flavor == "l2":
            seg = np.sqrt((inc**2).sum(axis=1))
        elif flavor == "l1":
            seg = np.abs(inc).sum(axis=1)
        elif flavor == "linf":
            seg = np.abs(inc).max(axis=1)
        else:
            raise DomainError(f"unknown norm flavor {flavor!r}")
        return float(seg.sum())

    def value_at(self, t: float) -> np.ndarray:
        """Piecewise-linear interpolation at time t (inside the interval)."""
        t0, t1 = self.interval
        if t < t0 - 1e-12 or t > t1 + 1e-12:
            raise DomainError(f"time {t} outside stream interval [{t0}, {t1}]")
        out = np.empty(self.dimension)
        for j in range(self.dimension):
            out[j] = np.interp(t, self.times, self.points[:, j])
        return out

    def __repr__(self):
        t0, t1 = self.interval
        return (
            f"Stream(d={self.dimension}, samples={self.n_samples}, "
            f"interval=[{t0:g}, {t1:g}])"
        )


# -- ingestion ---------------------------------------------------------------


def ingest_csv(source) -> Stream:
    """Read a stream from CSV with header ``t,x1,...,xd``.

    ``source`` may be a path or an open text file.  Parse failures raise
    StreamParseError naming the 1-based row (header row is row 1).
    """
    if hasattr(source, "read"):
        return _parse_csv(source, getattr(source, "name", "<stream>"))
    with open(source, newline="") as handle:
        return _parse_csv(handle, str(source))


def _parse_csv(handle, name) -> Stream:
    reader = csv.reader(handle)
    try:
        header = next(reader)
    except StopIteration:
        raise StreamParseError(f"{name}: empty file") from None
    header = [h.strip() for h in header]
    if len(header) < 2 or header[0] != "t":
        raise StreamParseError(
            f"{name}: row 1: expected header 't,x1,...,xd', got {','.join(header)!r}"
        )
    width = len(header)
    times, rows = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != width:
            raise StreamParseError(
                f"{name}: row {lineno}: expected {width} fields, got {len(row)}"
            )
        try:
            values = [float(cell) for cell in row]
        except ValueError:
            raise StreamParseError(
                f"{name}: row {lineno}: non-numeric cell in {row!r}"
            ) from None
        if times and values[0] <= times[-1]:
            raise StreamParseError(
                f"{name}: row {lineno}: time {values[0]!r} does not increase"
            )
        times.append(values[0])
        rows.append(values[1:])
    if not rows:
        raise StreamParseError(f"{name}: no data rows")
    return Stream(np.array(times), np.array(rows))


def write_csv(stream: Stream, dest) -> None:
    """Inverse of ingest_csv."""
    own = not hasattr(dest, "write")
    handle = open(dest, "w", newline="") if own else dest
    try:
        writer = csv.writer(handle)
        writer.writerow(["t"] + [f"x{j + 1}" for j in range(stream.dimension)])
        for t, row in zip(stream.times, stream.points):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in row])
    finally:
        if own:
            handle.close()


# -- canonical transforms -----------------------------------------------------


def time_augment(s: Stream) -> Stream:
    """Prepend time as coordinate 0, turning a d-stream into a (d+1)-stream."""
    return Stream(s.times, np.column_stack([s.times, s.points]))


def lead_lag(s: Stream) -> Stream:
    """Hoff lead-lag embedding into 2d dimensions, doubling the sample count.

    Convention: over each data increment the lead block (dimensions
    1..d) moves first, then the lag block (dimensions d+1..2d) follows.
    """
    n = s.n_samples
    if n == 1:
        return Stream(s.times, np.hstack([s.points, s.points]))
    times = np.empty(2 * n - 1)
    times[0::2] = s.times
    times[1::2] = 0.5 * (s.times[:-1] + s.times[1:])
    lead = np.repeat(s.points, 2, axis=0)[1:]
    lag = np.repeat(s.points, 2, axis=0)[:-1]
    return Stream(times, np.hstack([lead, lag]))


# -- path surgery -------------------------------------------------------------


def concat(a: Stream, b: Stream) -> Stream:
    """Run ``a`` then ``b``, translating ``b`` in time and space to continue ``a``."""
    if a.dimension != b.dimension:
        raise DimensionMismatchError(
            f"cannot concatenate streams of dimension {a.dimension} and {b.dimension}"
        )
    if b.n_samples == 1:
        return a
    shift_t = a.times[-1] - b.times[0]
    shift_x = a.points[-1] - b.points[0]
    times = np.concatenate([a.times, b.times[1:] + shift_t])
    points = np.vstack([a.points, b.points[1:] + shift_x])
    return Stream(times, points)


def reverse(s: Stream) -> Stream:
    """The same trace traversed backwards."""
    t0, t1 = s.interval
    return Stream((t0 + t1) - s.times[::-1], s.points[::-1])


def restrict(s: Stream, t0: float, t1: float) -> Stream:
    """Sub-stream on [t0, t1], interpolating the endpoints."""
    lo, hi = s.interval
    if t0 < lo - 1e-9 or t1 > hi + 1e-9 or t0 > t1:
        raise DomainError(f"[{t0}, {t1}] is not inside [{lo}, {hi}]")
    t0, t1 = max(t0, lo), min(t1, hi)
    if t0 == t1:
        return Stream([t0], s.value_at(t0)[None, :])
    inside = (s.times > t0) & (s.times < t1)
    times = np.concatenate([[t0], s.times[inside], [t1]])
    points = np.vstack([s.value_at(t0), s.points[inside], s.value_at(t1)])
    return Stream(times, points)


# -- signatures ---------------------------------------------------------------


def _segment_exp_levels(x: np.ndarray, depth: int) -> list[np.ndarray]:
    """Levels of exp(x) for a level-1 increment x: x^k / k!."""
    levels = [np.ones(1)]
    for k in range(1, depth + 1):
        levels.append(np.multiply.outer(levels[-1], x).reshape(-1) / k)
    return levels


def _signature_stepwise(increments: np.ndarray, depth: int) -> list[np.ndarray]:
    d = increments.shape[1]
    levels = [np.ones(1)] + [np.zeros(d**k) for k in range(1, depth + 1)]
    for x in increments:
        seg = _segment_exp_levels(x, depth)
        new = []
        for k in range(depth + 1):
            acc = np.zeros(d**k)
            for i in range(k + 1):
                acc += np.multiply.outer(levels[i], seg[k - i]).reshape(-1)
            new.append(acc)
        levels = new
    return levels


def _signature_prefix(increments: np.ndarray, depth: int) -> list[np.ndarray]:
    """Vectorized Chen product over all segments via prefix signatures."""
    n, d = increments.shape
    # per-segment exponential levels P[j]: (n, d^j)
    powers = [np.ones((n, 1))]
    for j in range(1, depth + 1):
        nxt = np.einsum("ta,tb->tab", powers[-1], increments).reshape(n, -1) / j
        powers.append(nxt)
    # prefix[k][t]: level-k signature of the first t segments
    prefix = [np.ones(n + 1)]
    for k in range(1, depth + 1):
        contrib = np.zeros((n, d**k))
        for j in range(1, k + 1):
            if k - j == 0:
                contrib += powers[j]
            else:
                lower = prefix[k - j][:-1]
                contrib += np.einsum("ta,tb->tab", lower, powers[j]).reshape(n, -1)
        level = np.zeros((n + 1, d**k))
        np.cumsum(contrib, axis=0, out=level[1:])
        prefix.append(level)
    return [np.ones(1)] + [prefix[k][-1] for k in range(1, depth + 1)]


def signature(s: Stream, depth: int) -> TruncatedTensor:
    """Truncated signature of the stream: the ordered product of segment exponentials."""
    if depth < 1:
        raise DomainError("depth must be >= 1")
    d = s.dimension
    increments = s.increments()
    if increments.shape[0] == 0:
        unit = TruncatedTensor.unit(d, depth)
        return TruncatedTensor(d, depth, unit.levels, grouplike=True)
    if (increments.shape[0] + 1) * d**depth <= _VECTOR_BUDGET:
        levels = _signature_prefix(increments, depth)
    else:
        levels = _signature_stepwise(increments, depth)
    return TruncatedTensor(d, depth, levels, grouplike=True)


def log_signature(s: Stream, depth: int) -> lie_algebra.LieCoordinates:
    """Lyndon-basis coordinates of log of the stream's signature."""
    return lie_algebra.tensor_to_lie_coords(tensor_log(signature(s, depth)))


# -- p-variation metric profile ----------------------------------------------


@dataclass(frozen=True, eq=False)
class PartitionDistanceReport:
    """Lower-bound profile for the signature p-variation distance.

    ``estimates[i]`` is the best value seen over dyadic partitions up to
    ``levels[i]`` refinements; the sequence is non-decreasing and each entry
    underestimates the sup over all partitions.
    """

    p: float
    levels: tuple[int, ...]
    estimates: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.estimates, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "estimates", arr)


def _unit_time(s: Stream) -> Stream:
    t0, t1 = s.interval
    if t1 == t0:
        # zero-duration stream reads as the constant path on [0, 1]
        return Stream([0.0, 1.0], np.vstack([s.points[:1], s.points[:1]]))
    return Stream((s.times - t0) / (t1 - t0), s.points)


def dp_distance_estimate(
    a: Stream, b: Stream, p: float, max_level: int
) -> PartitionDistanceReport:
    """Dyadic-refinement approximation of the signature p-variation distance.

    Both streams are reparameterized to [0, 1].  For each refinement level
    the partition sum uses levelwise signature discrepancies raised to p/m;
    the reported estimate at level L is the maximum over levels <= L, a
    certified lower bound for the sup over all partitions.
    """
    if a.dimension != b.dimension:
        raise DimensionMismatchError(
            f"streams have dimensions {a.dimension} and {b.dimension}"
        )
    if p < 1:
        raise DomainError("p must be >= 1")
    if max_level < 1:
        raise DomainError("max_level must be >= 1")
    a, b = _unit_time(a), _unit_time(b)
    m_top = int(np.floor(p))
    levels, estimates = [], []
    best = 0.0
    for level in range(1, max_level + 1):
        cuts = np.linspace(0.0, 1.0, 2**level + 1)
        total = 0.0
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            sig_a = signature(restrict(a, lo, hi), m_top)
            sig_b = signature(restrict(b, lo, hi), m_top)
            worst = 0.0
            for m in range(1, m_top + 1):
                diff = sig_a.levels[m] - sig_b.levels[m]
                value = float(np.linalg.norm(diff)) ** (p / m)
                worst = max(worst, value)
            total += worst
        best = max(best, total)
        levels.append(level)
        estimates.append(best)
    return PartitionDistanceReport(p, tuple(levels), np.array(estimates))
