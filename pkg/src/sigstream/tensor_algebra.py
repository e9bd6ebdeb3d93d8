"""Graded truncated tensor series over R^d.

Elements are stored densely, one flat float64 array per level, with level-k
coefficients in lexicographic word order over the alphabet {1, ..., d}.
Provides the truncated product, exponential and logarithm, word pairings,
the shuffle product on words, and per-level norms.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, DomainError, OutOfDepthError

__all__ = [
    "Word",
    "TruncatedTensor",
    "GradeNorms",
    "tensor_mul",
    "tensor_exp",
    "tensor_log",
    "inner",
    "shuffle",
    "shuffle_inner",
    "grade_norms",
    "words_of_degree",
    "coeff_map",
    "to_json_dict",
    "from_json_dict",
]


@dataclass(frozen=True)
class Word:
    """Index of one coordinate iterated integral: letters in {1, ..., d}.

    Rendered as comma-joined letters, e.g. ``Word((1, 2, 2))`` is ``"1,2,2"``;
    the empty word renders as ``""``.
    """

    letters: tuple[int, ...]

    def __post_init__(self):
        letters = tuple(int(c) for c in self.letters)
        if any(c < 1 for c in letters):
            raise DomainError(f"word letters must be >= 1, got {letters}")
        object.__setattr__(self, "letters", letters)

    @property
    def degree(self) -> int:
        return len(self.letters)

    def index(self, dim: int) -> int:
        """Flat lexicographic index of this word among words of its degree."""
        if any(c > dim for c in self.letters):
            raise DomainError(f"letter out of range for dimension {dim}: {self}")
        idx = 0
        for c in self.letters:
            idx = idx * dim + (c - 1)
        return idx

    def __str__(self) -> str:
        return ",".join(str(c) for c in self.letters)

    @classmethod
    def from_string(cls, text: str) -> "Word":
        text = text.strip()
        if not text:
            return cls(())
        return cls(tuple(int(tok) for tok in text.split(",")))


EMPTY_WORD = Word(())


def words_of_degree(dim: int, degree: int):
    """All words of the given degree in lexicographic order."""
    for letters in itertools.product(range(1, dim + 1), repeat=degree):
        yield Word(letters)


class TruncatedTensor:
    """Element of the depth-N truncated tensor algebra over R^dim.

    ``levels[k]`` is a read-only flat array of the d^k level-k coefficients.
    Instances are immutable; all arithmetic returns new objects.  The
    ``grouplike`` flag is advisory metadata set by constructors (stream
    signatures, exponentials of Lie elements); it is checked by tests, not
    enforced by arithmetic.
    """

    __slots__ = ("dim", "depth", "levels", "grouplike")

    def __init__(self, dim, depth, levels=None, grouplike=False):
        if dim < 1 or depth < 1:
            raise DomainError("dimension and depth must be positive")
        self.dim = int(dim)
        self.depth = int(depth)
        if levels is None:
            stored = [np.zeros(self.dim**k) for k in range(self.depth + 1)]
        else:
            if len(levels) != self.depth + 1:
                raise DimensionMismatchError(
                    f"expected {self.depth + 1} levels, got {len(levels)}"
                )
            stored = []
            for k, lvl in enumerate(levels):
                arr = np.asarray(lvl, dtype=float).reshape(-1).copy()
                if arr.size != self.dim**k:
                    raise DimensionMismatchError(
                        f"level {k} must hold {self.dim**k} coefficients, got {arr.size}"
                    )
                stored.append(arr)
        for arr in stored:
            arr.flags.writeable = False
        self.levels = tuple(stored)
        self.grouplike = bool(grouplike)

    @classmethod
    def zeros(cls, dim, depth):
        return cls(dim, depth)

    @classmethod
    def unit(cls, dim, depth):
        t = cls(dim, depth)
        return t._replace_level(0, np.ones(1))

    @classmethod
    def from_level1(cls, vec, depth, grouplike=False):
        vec = np.asarray(vec, dtype=float).reshape(-1)
        t = cls(vec.size, depth, grouplike=grouplike)
        return t._replace_level(1, vec)

    def _replace_level(self, k, arr):
        levels = list(self.levels)
        arr = np.asarray(arr, dtype=float).reshape(-1)
        levels[k] = arr
        return TruncatedTensor(self.dim, self.depth, levels, grouplike=self.grouplike)

    def level(self, k) -> np.ndarray:
        if not 0 <= k <= self.depth:
            raise OutOfDepthError(f"level {k} outside 0..{self.depth}")
        return self.levels[k]

    def truncated(self, depth) -> "TruncatedTensor":
        if depth > self.depth:
            raise OutOfDepthError("cannot extend a truncated tensor")
        return TruncatedTensor(
            self.dim, depth, self.levels[: depth + 1], grouplike=self.grouplike
        )

    # -- linear-space arithmetic -------------------------------------------

    def __add__(self, other):
        other = _coerce(other, self)
        a, b = _promote(self, other)
        return TruncatedTensor(
            a.dim, a.depth, [x + y for x, y in zip(a.levels, b.levels)]
        )

    def __sub__(self, other):
        other = _coerce(other, self)
        a, b = _promote(self, other)
        return TruncatedTensor(
            a.dim, a.depth, [x - y for x, y in zip(a.levels, b.levels)]
        )

    def __mul__(self, scalar):
        scalar = float(scalar)
        return TruncatedTensor(
            self.dim, self.depth, [scalar * x for x in self.levels]
        )

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __repr__(self):
        head = float(self.levels[0][0])
        return (
            f"TruncatedTensor(dim={self.dim}, depth={self.depth}, "
            f"scalar={head:g}, grouplike={self.grouplike})"
        )

    def norm(self) -> float:
        """Euclidean norm over all coefficients."""
        return float(np.sqrt(sum(float(x @ x) for x in self.levels)))


def _coerce(other, like):
    if isinstance(other, TruncatedTensor):
        return other
    raise TypeError(f"expected TruncatedTensor, got {type(other).__name__}")


def _promote(a: TruncatedTensor, b: TruncatedTensor):
    """Align operands: equal dim required, mixed depths truncate to the minimum."""
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimension mismatch: {a.dim} vs {b.dim}")
    depth = min(a.depth, b.depth)
    return a.truncated(depth), b.truncated(depth)


def _mul_levels(a_levels, b_levels, depth):
    """Raw level-list product, truncated at ``depth``."""
    out = []
    for k in range(depth + 1):
        acc = None
        for i in range(k + 1):
            term = np.multiply.outer(a_levels[i], b_levels[k - i]).reshape(-1)
            acc = term if acc is None else acc + term
        out.append(acc)
    return out


def tensor_mul(a: TruncatedTensor, b: TruncatedTensor) -> TruncatedTensor:
    """Truncated tensor-algebra product of ``a`` and ``b``."""
    a, b = _promote(a, b)
    levels = _mul_levels(a.levels, b.levels, a.depth)
    return TruncatedTensor(
        a.dim, a.depth, levels, grouplike=a.grouplike and b.grouplike
    )


def tensor_exp(a: TruncatedTensor, assume_lie: bool | None = None) -> TruncatedTensor:
    """exp(a) = sum_k a^k / k!, truncated; requires zero scalar term.

    The result is flagged grouplike when ``a`` is known to be a Lie element
    (pass ``assume_lie=True``); pure level-1 input is detected automatically.
    """
    if abs(float(a.levels[0][0])) != 0.0:
        raise DomainError("tensor_exp requires a zero level-0 coefficient")
    n = a.depth
    # Horner form: 1 + a(1 + a/2 (1 + a/3 (...)))
    acc = [np.zeros(a.dim**k) for k in range(n + 1)]
    acc[0] = np.ones(1)
    for k in range(n, 0, -1):
        acc = _mul_levels([lvl / k for lvl in a.levels], acc, n)
        acc[0] = acc[0] + 1.0
    if assume_lie is None:
        assume_lie = all(
            not lvl.any() for lvl in a.levels[2:]
        )  # a single level-1 element is trivially Lie
    return TruncatedTensor(a.dim, a.depth, acc, grouplike=bool(assume_lie))


def tensor_log(a: TruncatedTensor) -> TruncatedTensor:
    """log(a) = sum_k (-1)^(k+1) (a - 1)^k / k, truncated; requires unit scalar term."""
    if float(a.levels[0][0]) != 1.0:
        raise DomainError("tensor_log requires a unit level-0 coefficient")
    n = a.depth
    x = [lvl.copy() for lvl in a.levels]
    x[0] = np.zeros(1)
    power = x
    total = [lvl.copy() for lvl in x]
    for k in range(2, n + 1):
        power = _mul_levels(power, x, n)
        sign = 1.0 if k % 2 == 1 else -1.0
        for lvl_out, lvl_p in zip(total, power):
            lvl_out += sign / k * lvl_p
    return TruncatedTensor(a.dim, a.depth, total)


def inner(word: Word, a: TruncatedTensor) -> float:
    """Coefficient of ``word`` in ``a`` (the coordinate iterated integral pairing)."""
    if word.degree > a.depth:
        raise OutOfDepthError(
            f"word degree {word.degree} exceeds truncation depth {a.depth}"
        )
    return float(a.levels[word.degree][word.index(a.dim)])


@functools.lru_cache(maxsize=65536)
def _shuffle_letters(u: tuple, v: tuple) -> tuple:
    if not u:
        return ((v, 1),)
    if not v:
        return ((u, 1),)
    out: dict[tuple, int] = {}
    for w, m in _shuffle_letters(u[:-1], v):
        key = w + (u[-1],)
        out[key] = out.get(key, 0) + m
    for w, m in _shuffle_letters(u, v[:-1]):
        key = w + (v[-1],)
        out[key] = out.get(key, 0) + m
    return tuple(sorted(out.items()))


def shuffle(u: Word, v: Word) -> dict[Word, int]:
    """Shuffle product of two words as a formal integer combination of words.

    The result has C(deg u + deg v, deg u) terms counted with multiplicity.
    """
    return {Word(w): m for w, m in _shuffle_letters(u.letters, v.letters)}


def shuffle_inner(u: Word, v: Word, a: TruncatedTensor) -> float:
    """<u shuffle v, a> -- equals <u,a><v,a> on grouplike tensors."""
    if u.degree + v.degree > a.depth:
        raise OutOfDepthError(
            f"shuffle degree {u.degree + v.degree} exceeds depth {a.depth}"
        )
    return sum(m * inner(w, a) for w, m in shuffle(u, v).items())


@dataclass(frozen=True, eq=False)
class GradeNorms:
    """Per-level norms of a truncated tensor, levels 0..N."""

    flavor: str
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)


_NORMS = {
    "l1": lambda x: float(np.abs(x).sum()),
    "l2": lambda x: float(np.sqrt(x @ x)),
    "linf": lambda x: float(np.abs(x).max()) if x.size else 0.0,
}


def grade_norms(a: TruncatedTensor, flavor: str = "l1") -> GradeNorms:
    """Per-level norms of ``a`` under the selected flavor (l1, l2 or linf)."""
    if flavor not in _NORMS:
        raise DomainError(f"unknown norm flavor {flavor!r}; use l1, l2 or linf")
    fn = _NORMS[flavor]
    return GradeNorms(flavor, np.array([fn(lvl) for lvl in a.levels]))


# -- JSON wire format -------------------------------------------------------


def to_json_dict(a: TruncatedTensor) -> dict:
    """{"d": int, "depth": int, "levels": [[...], ...]} with lexicographic levels."""
    return {
        "d": a.dim,
        "depth": a.depth,
        "levels": [lvl.tolist() for lvl in a.levels],
    }


def from_json_dict(obj: dict) -> TruncatedTensor:
    return TruncatedTensor(int(obj["d"]), int(obj["depth"]), obj["levels"])


def coeff_map(a: TruncatedTensor) -> dict[str, float]:
    """Word-keyed coefficient map, words rendered as comma-joined letters."""
    out = {}
    for k in range(a.depth + 1):
        for word, value in zip(words_of_degree(a.dim, k), a.levels[k]):
            out[str(word)] = float(value)
    return out
