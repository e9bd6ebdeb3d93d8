"""Lyndon basis of the free Lie algebra up to a truncation depth.

Lyndon words realize a Hall basis: each word carries its standard right
factorization, whose recursive bracketing expands into the tensor algebra.
Log-signatures are projected onto this basis by level-wise least squares,
and Lie membership is certified two ways: by the projection residual and
independently by the Dynkin right-bracketing idempotent.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NotALieElementError
from .tensor_algebra import TruncatedTensor, Word

__all__ = [
    "LyndonBasisElement",
    "LieCoordinates",
    "lyndon_basis",
    "bracket_expand",
    "tensor_to_lie_coords",
    "dynkin_check",
    "witt_dimension",
    "render_bracketing",
]


@dataclass(frozen=True)
class LyndonBasisElement:
    """A Lyndon word together with its standard bracketing.

    ``bracketing`` is a letter (int) or a pair of sub-bracketings; the pair
    follows the right standard factorization w = (u, v) with v the longest
    proper Lyndon suffix of w.
    """

    word: Word
    bracketing: object

    @property
    def degree(self) -> int:
        return self.word.degree

    def __str__(self) -> str:
        return render_bracketing(self.bracketing)


def render_bracketing(tree) -> str:
    """Nested-bracket text form, e.g. ``[1,[1,2]]``; single letters render bare."""
    if isinstance(tree, int):
        return str(tree)
    left, right = tree
    return f"[{render_bracketing(left)},{render_bracketing(right)}]"


def _lyndon_words(dim: int, max_len: int):
    """All Lyndon words over {1..dim} of length <= max_len, lexicographic (Duval)."""
    w = [1]
    while w:
        yield tuple(w)
        w = [w[i % len(w)] for i in range(max_len)]
        while w and w[-1] == dim:
            w.pop()
        if w:
            w[-1] += 1


@functools.lru_cache(maxsize=None)
def _standard_bracketing(letters: tuple):
    if len(letters) == 1:
        return letters[0]
    # right standard factorization: v is the smallest (equivalently the
    # longest Lyndon) proper suffix, u the complementary prefix
    suffixes = [letters[i:] for i in range(1, len(letters))]
    v = min(suffixes)
    u = letters[: len(letters) - len(v)]
    return (_standard_bracketing(u), _standard_bracketing(v))


@functools.lru_cache(maxsize=None)
def lyndon_basis(dim: int, depth: int) -> tuple[LyndonBasisElement, ...]:
    """Ordered Lyndon basis of the free Lie algebra on ``dim`` letters, degree <= depth.

    Elements are sorted by (degree, lexicographic word); the degree-k count
    equals the Witt number.
    """
    if dim < 1 or depth < 1:
        raise DomainError("dim and depth must be positive")
    words = sorted(_lyndon_words(dim, depth), key=lambda w: (len(w), w))
    return tuple(
        LyndonBasisElement(Word(w), _standard_bracketing(w)) for w in words
    )


@functools.lru_cache(maxsize=None)
def _expand_tree(dim: int, tree) -> np.ndarray:
    if isinstance(tree, int):
        vec = np.zeros(dim)
        vec[tree - 1] = 1.0
        vec.flags.writeable = False
        return vec
    left = _expand_tree(dim, tree[0])
    right = _expand_tree(dim, tree[1])
    vec = np.kron(left, right) - np.kron(right, left)
    vec.flags.writeable = False
    return vec


def _tree_degree(tree) -> int:
    if isinstance(tree, int):
        return 1
    return _tree_degree(tree[0]) + _tree_degree(tree[1])


def bracket_expand(element, dim: int, depth: int | None = None) -> TruncatedTensor:
    """Expand a basis element (or raw bracketing tree) into the tensor algebra."""
    tree = element.bracketing if isinstance(element, LyndonBasisElement) else element
    vec = _expand_tree(dim, tree)
    degree = _tree_degree(tree)
    if depth is None:
        depth = degree
    levels = [np.zeros(dim**k) for k in range(depth + 1)]
    levels[degree] = vec
    return TruncatedTensor(dim, depth, levels)


@functools.lru_cache(maxsize=None)
def _level_expansion(dim: int, degree: int):
    """(elements, matrix, pseudo-inverse) for the degree-k Lyndon expansion."""
    elements = tuple(
        b for b in lyndon_basis(dim, degree) if b.degree == degree
    )
    if elements:
        matrix = np.column_stack(
            [_expand_tree(dim, b.bracketing) for b in elements]
        )
        pinv = np.linalg.pinv(matrix)
    else:
        # e.g. d = 1 beyond degree 1: the graded piece is trivial
        matrix = np.zeros((dim**degree, 0))
        pinv = np.zeros((0, dim**degree))
    matrix.flags.writeable = False
    pinv.flags.writeable = False
    return elements, matrix, pinv


@dataclass(frozen=True, eq=False)
class LieCoordinates:
    """Coordinates of a Lie element in the Lyndon basis up to ``depth``.

    ``values`` is aligned with ``lyndon_basis(dim, depth)``.
    """

    dim: int
    depth: int
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float).reshape(-1).copy()
        expected = len(lyndon_basis(self.dim, self.depth))
        if arr.size != expected:
            raise DomainError(
                f"expected {expected} coordinates for dim={self.dim}, depth={self.depth}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def basis(self) -> tuple[LyndonBasisElement, ...]:
        return lyndon_basis(self.dim, self.depth)

    def coeff(self, key) -> float:
        """Coordinate on a basis element, addressed by element, Word or rendering."""
        idx = self._lookup().get(_coord_key(key))
        if idx is None:
            raise KeyError(f"not a Lyndon basis element here: {key!r}")
        return float(self.values[idx])

    @functools.cache
    def _lookup(self) -> dict:
        table = {}
        for i, b in enumerate(self.basis):
            table[b.word.letters] = i
            table[str(b)] = i
        return table

    def max_degree(self, tol: float = 0.0) -> int:
        """Highest degree carrying a coordinate with |value| > tol (0 if none)."""
        out = 0
        for b, v in zip(self.basis, self.values):
            if abs(v) > tol:
                out = max(out, b.degree)
        return out

    def to_tensor(self, depth: int | None = None) -> TruncatedTensor:
        depth = self.depth if depth is None else depth
        levels = [np.zeros(self.dim**k) for k in range(depth + 1)]
        for b, v in zip(self.basis, self.values):
            if v != 0.0 and b.degree <= depth:
                levels[b.degree] = levels[b.degree] + v * _expand_tree(
                    self.dim, b.bracketing
                )
        return TruncatedTensor(self.dim, depth, levels)

    def as_pairs(self) -> list[tuple[str, float]]:
        """(rendered element, coordinate) pairs in basis order."""
        return [(str(b), float(v)) for b, v in zip(self.basis, self.values)]


def _coord_key(key):
    if isinstance(key, LyndonBasisElement):
        return key.word.letters
    if isinstance(key, Word):
        return key.letters
    if isinstance(key, tuple):
        return tuple(int(c) for c in key)
    if isinstance(key, str):
        return key
    raise TypeError(f"cannot address a coordinate with {type(key).__name__}")


def tensor_to_lie_coords(
    a: TruncatedTensor, rtol: float = 1e-9, atol: float = 1e-12
) -> LieCoordinates:
    """Project a Lie element onto Lyndon coordinates, level by level.

    Raises NotALieElementError when any level's least-squares residual
    exceeds ``rtol * |a| + atol``; this residual test is the Lie-membership
    check.  The absolute floor keeps rounding-level residue from rejecting
    elements that are themselves at rounding scale (e.g. the log-signature
    of a path concatenated with its own reversal).
    """
    if float(a.levels[0][0]) != 0.0:
        raise DomainError("a Lie element has zero level-0 coefficient")
    tolerance = rtol * a.norm() + atol
    coords = []
    for degree in range(1, a.depth + 1):
        _, matrix, pinv = _level_expansion(a.dim, degree)
        lam = pinv @ a.levels[degree]
        residual = float(np.linalg.norm(matrix @ lam - a.levels[degree]))
        if residual > tolerance:
            raise NotALieElementError(
                f"level-{degree} residual {residual:.3e} exceeds {tolerance:.3e}",
                level=degree,
                residual=residual,
            )
        coords.append(lam)
    return LieCoordinates(a.dim, a.depth, np.concatenate(coords))


def _dynkin_apply(vec: np.ndarray, dim: int, degree: int) -> np.ndarray:
    """Right-nested bracketing map: word i1..ik -> [e_i1, [e_i2, [... e_ik]]]."""
    if degree <= 1:
        return vec.copy()
    block = dim ** (degree - 1)
    out = np.zeros_like(vec)
    tail_idx = np.arange(block) * dim
    for letter in range(dim):
        sub = _dynkin_apply(vec[letter * block : (letter + 1) * block], dim, degree - 1)
        out[letter * block : (letter + 1) * block] += sub
        out[tail_idx + letter] -= sub
    return out


def dynkin_check(a: TruncatedTensor) -> np.ndarray:
    """Per-level residuals ||D(a_k) - k a_k|| of the Dynkin idempotent test.

    Vanishing residuals certify that each graded piece is a Lie element;
    this is independent of the Lyndon projection route.
    """
    if float(a.levels[0][0]) != 0.0:
        raise DomainError("Dynkin check requires a zero level-0 coefficient")
    residuals = np.zeros(a.depth)
    for k in range(1, a.depth + 1):
        d_ak = _dynkin_apply(a.levels[k], a.dim, k)
        residuals[k - 1] = np.linalg.norm(d_ak - k * a.levels[k])
    return residuals


def _mobius(n: int) -> int:
    if n == 1:
        return 1
    result, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1
    if n > 1:
        result = -result
    return result


def witt_dimension(dim: int, degree: int) -> int:
    """Dimension of the degree-k graded piece of the free Lie algebra on d letters."""
    total = 0
    for m in range(1, degree + 1):
        if degree % m == 0:
            total += _mobius(m) * dim ** (degree // m)
    return total // degree
