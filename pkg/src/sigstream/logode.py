"""The log-ODE method for controlled differential equations.

Per step: take the truncated log-signature of the driving stream over the
step, extend the linear map (driver coordinate -> vector field) through the
bracket structure of the free Lie algebra, freeze the resulting autonomous
field, and integrate it for unit time with classical RK4.

Brackets follow [V, W](y) = DW(y) V(y) - DV(y) W(y); on linear fields
V_i(y) = A_i y this gives [V_i, V_j] -> (A_j A_i - A_i A_j) y, the
composition order that reproduces the exact segment-exponential solution
of a linear system (see ``linear_solve``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import CapabilityError, DivergenceError, DomainError
from .lie_algebra import LieCoordinates
from .streams import Stream, log_signature, restrict
from .tensor_algebra import TruncatedTensor

__all__ = [
    "VectorFieldSystem",
    "LinearSystem",
    "LogOdeSchedule",
    "lie_extend_evaluate",
    "logode_step",
    "solve",
    "linear_solve",
    "linear_series_apply",
    "series_tail_bound",
]

_FD_SCALE = 1e-5  # directional finite-difference step per unit of (1 + |y|)


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """Matrices A_1..A_d of a linear controlled system dy = sum_i A_i y dgamma_i."""

    matrices: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.matrices, dtype=float).copy()
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise DomainError("matrices must have shape (d, m, m)")
        if not np.all(np.isfinite(arr)):
            raise DomainError("matrices must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "matrices", arr)

    @property
    def driver_dim(self) -> int:
        return self.matrices.shape[0]

    @property
    def state_dim(self) -> int:
        return self.matrices.shape[1]

    def operator_norm(self) -> float:
        """max_i ||A_i||_2, the norm of the map from l1-normed drivers."""
        return max(float(np.linalg.norm(a, 2)) for a in self.matrices)


class VectorFieldSystem:
    """Driving vector fields V_1..V_d on R^m with their Jacobians.

    ``smoothness`` declares how many derivatives of the fields are usable;
    brackets of degree k need k - 1.  When ``validate_at`` points are given,
    each Jacobian is checked against central finite differences of its field
    at those points (1e-5 relative).
    """

    def __init__(
        self,
        state_dim: int,
        driver_dim: int,
        fields,
        jacobians,
        smoothness: int = 1,
        validate_at=None,
    ):
        if len(fields) != driver_dim or len(jacobians) != driver_dim:
            raise DomainError("need one field and one Jacobian per driver coordinate")
        self.state_dim = int(state_dim)
        self.driver_dim = int(driver_dim)
        self.fields = tuple(fields)
        self.jacobians = tuple(jacobians)
        self.smoothness = smoothness
        self._tree_cache: dict = {}
        if validate_at is not None:
            self._validate_jacobians(validate_at)

    @classmethod
    def from_linear(cls, lin: LinearSystem) -> "VectorFieldSystem":
        mats = lin.matrices

        def make(a):
            return (lambda y: a @ y), (lambda y: a)

        pairs = [make(a) for a in mats]
        return cls(
            lin.state_dim,
            lin.driver_dim,
            [f for f, _ in pairs],
            [j for _, j in pairs],
            smoothness=10**9,
        )

    def _validate_jacobians(self, points, rtol=1e-5):
        for y in np.atleast_2d(np.asarray(points, dtype=float)):
            for i, (f, jac) in enumerate(zip(self.fields, self.jacobians)):
                J = np.asarray(jac(y), dtype=float)
                h = 1e-6 * (1.0 + float(np.linalg.norm(y)))
                fd = np.empty_like(J)
                for k in range(self.state_dim):
                    e = np.zeros(self.state_dim)
                    e[k] = h
                    fd[:, k] = (np.asarray(f(y + e)) - np.asarray(f(y - e))) / (2 * h)
                scale = max(1.0, float(np.abs(J).max()))
                if np.abs(J - fd).max() > rtol * scale:
                    raise DomainError(
                        f"Jacobian {i + 1} disagrees with finite differences at {y}"
                    )

    # -- bracket fields -----------------------------------------------------

    def _field_for_tree(self, tree):
        """Evaluable field (and exact Jacobian when available) for a bracket tree."""
        cached = self._tree_cache.get(tree)
        if cached is not None:
            return cached
        if isinstance(tree, int):
            out = (self.fields[tree - 1], self.jacobians[tree - 1])
        else:
            f_left, jac_left = self._field_for_tree(tree[0])
            f_right, jac_right = self._field_for_tree(tree[1])

            def bracket(y, fl=f_left, jl=jac_left, fr=f_right, jr=jac_right):
                vl = np.asarray(fl(y), dtype=float)
                vr = np.asarray(fr(y), dtype=float)
                dvr_vl = _directional(fr, jr, y, vl)
                dvl_vr = _directional(fl, jl, y, vr)
                return dvr_vl - dvl_vr

            out = (bracket, None)
        self._tree_cache[tree] = out
        return out


def _directional(f, jac, y, w):
    """Directional derivative Df(y) w: exact Jacobian when supplied, else central FD."""
    if jac is not None:
        return np.asarray(jac(y), dtype=float) @ w
    norm_w = float(np.linalg.norm(w))
    if norm_w == 0.0:
        return np.zeros_like(np.asarray(w, dtype=float))
    h = _FD_SCALE * (1.0 + float(np.linalg.norm(y)))
    unit = w / norm_w
    plus = np.asarray(f(y + h * unit), dtype=float)
    minus = np.asarray(f(y - h * unit), dtype=float)
    return (plus - minus) * (norm_w / (2.0 * h))


def lie_extend_evaluate(
    vfs: VectorFieldSystem, coords: LieCoordinates, y
) -> np.ndarray:
    """Evaluate the Lie extension of the field map at the given coordinates.

    Returns sum_b lambda_b B_b(y) where B_b is the iterated vector-field
    bracket following each basis element's bracketing.
    """
    if coords.dim != vfs.driver_dim:
        raise DomainError(
            f"coordinates are {coords.dim}-dimensional, fields expect {vfs.driver_dim}"
        )
    top = coords.max_degree()
    if top > vfs.smoothness + 1:
        raise CapabilityError(
            f"degree-{top} brackets need {top - 1} derivatives; "
            f"system declares {vfs.smoothness}"
        )
    y = np.asarray(y, dtype=float)
    out = np.zeros(vfs.state_dim)
    for element, lam in zip(coords.basis, coords.values):
        if lam == 0.0:
            continue
        field, _ = vfs._field_for_tree(element.bracketing)
        out += lam * np.asarray(field(y), dtype=float)
    return out


def logode_step(
    vfs: VectorFieldSystem, y0, coords: LieCoordinates, substeps: int
) -> np.ndarray:
    """Integrate the frozen log-signature field over unit time with RK4."""
    if substeps < 1:
        raise DomainError("substeps must be >= 1")
    y = np.asarray(y0, dtype=float).copy()
    dt = 1.0 / substeps
    for step in range(substeps):
        k1 = lie_extend_evaluate(vfs, coords, y)
        k2 = lie_extend_evaluate(vfs, coords, y + 0.5 * dt * k1)
        k3 = lie_extend_evaluate(vfs, coords, y + 0.5 * dt * k2)
        k4 = lie_extend_evaluate(vfs, coords, y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise DivergenceError(
                f"state became non-finite at substep {step + 1}", substep=step + 1
            )
    return y


@dataclass(frozen=True, eq=False)
class LogOdeSchedule:
    """Step boundaries inside the driver's interval, truncation degree, RK4 substeps."""

    boundaries: np.ndarray
    depth: int
    substeps: int = 16

    def __post_init__(self):
        arr = np.asarray(self.boundaries, dtype=float).reshape(-1)
        if arr.size < 2 or not np.all(np.diff(arr) > 0):
            raise DomainError("boundaries must be increasing with at least two entries")
        if self.depth < 1:
            raise DomainError("truncation degree must be >= 1")
        arr.flags.writeable = False
        object.__setattr__(self, "boundaries", arr)

    @classmethod
    def uniform(cls, stream: Stream, steps: int, depth: int, substeps: int = 16):
        t0, t1 = stream.interval
        return cls(np.linspace(t0, t1, steps + 1), depth, substeps)


def solve(
    vfs: VectorFieldSystem, stream: Stream, y0, schedule: LogOdeSchedule
) -> np.ndarray:
    """Log-ODE trajectory: the state at every schedule boundary, row 0 = y0."""
    t0, t1 = stream.interval
    bounds = schedule.boundaries
    if bounds[0] < t0 - 1e-9 or bounds[-1] > t1 + 1e-9:
        raise DomainError("schedule boundaries leave the stream's interval")
    states = np.empty((bounds.size, vfs.state_dim))
    y = np.asarray(y0, dtype=float)
    states[0] = y
    for i in range(bounds.size - 1):
        piece = restrict(stream, bounds[i], bounds[i + 1])
        coords = log_signature(piece, schedule.depth)
        y = logode_step(vfs, y, coords, schedule.substeps)
        states[i + 1] = y
    return states


# -- linear systems: exact oracle and truncated signature series --------------


def linear_solve(lin: LinearSystem, s: Stream, y0) -> np.ndarray:
    """Exact solution of the linear system along a polygonal stream.

    Ordered product over segments of exp(sum_i dgamma_i A_i), applied to y0.
    """
    y = np.asarray(y0, dtype=float).copy()
    if s.dimension != lin.driver_dim:
        raise DomainError(
            f"stream dimension {s.dimension} != system driver dimension {lin.driver_dim}"
        )
    for inc in s.increments():
        step = np.tensordot(inc, lin.matrices, axes=(0, 0))
        y = scipy.linalg.expm(step) @ y
    return y


def linear_series_apply(lin: LinearSystem, sig: TruncatedTensor, y0) -> np.ndarray:
    """Truncated signature series sum_k sum_w S_w A_{w_k} ... A_{w_1} y0."""
    if sig.dim != lin.driver_dim:
        raise DomainError("signature and system driver dimensions differ")
    d, m = lin.driver_dim, lin.state_dim
    y0 = np.asarray(y0, dtype=float)
    total = sig.levels[0][0] * y0
    words = np.eye(m)[None, :, :]  # level-0 word matrix
    for k in range(1, sig.depth + 1):
        # matrix for word w'j is A_j @ (matrix for w'); flat order w'*d + j
        words = np.einsum("jab,wbc->wjac", lin.matrices, words).reshape(d**k, m, m)
        total = total + np.tensordot(sig.levels[k], words, axes=(0, 0)) @ y0
    return total


def series_tail_bound(op_norm: float, length: float, depth: int, y0_norm: float) -> float:
    """Tail sum_{k > depth} (|A| L)^k / k! * |y0| bounding the series remainder."""
    x = op_norm * length
    term = x ** (depth + 1) / math.factorial(depth + 1)
    total, k = 0.0, depth + 1
    while True:
        total += term
        k += 1
        term *= x / k
        if term <= 1e-17 * total or k > 10_000:
            break
    return total * y0_norm
