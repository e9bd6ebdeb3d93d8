"""Unitary development of streams.

The driver is mapped into the unitary group by solving dPsi = Psi . (i sum_j
H_j dgamma_j) with traceless Hermitian generators H_j; over a polygonal
stream the solution is the ordered product of segment exponentials, each
computed by eigendecomposition so the result is unitary to rounding.  The
expectation of the developed matrix over random streams plays the role of a
characteristic function of the signature: it is a bounded linear functional
of the signature (see ``evaluate_signature``), so it always has finite
expectation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, DomainError
from .streams import Stream
from .tensor_algebra import TruncatedTensor

__all__ = [
    "UnitaryPolicy",
    "DevelopmentResult",
    "develop",
    "expected_development",
    "evaluate_signature",
    "development_tail_bound",
    "unitarity_defect",
    "random_policy",
]


@dataclass(frozen=True, eq=False)
class UnitaryPolicy:
    """Traceless Hermitian generators H_1..H_d of size u; psi(e_j) = i H_j."""

    generators: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.generators, dtype=complex).copy()
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise DomainError("generators must have shape (d, u, u)")
        if arr.shape[1] < 2:
            raise DomainError("matrix size must be at least 2")
        scale = max(1.0, float(np.abs(arr).max()))
        for j, h in enumerate(arr):
            if np.abs(h - h.conj().T).max() > 1e-12 * scale:
                raise DomainError(f"generator {j + 1} is not Hermitian")
            if abs(np.trace(h)) > 1e-12 * scale * arr.shape[1]:
                raise DomainError(f"generator {j + 1} is not traceless")
        arr.flags.writeable = False
        object.__setattr__(self, "generators", arr)

    @property
    def size(self) -> int:
        return self.generators.shape[1]

    @property
    def driver_dim(self) -> int:
        return self.generators.shape[0]

    def max_generator_norm(self) -> float:
        return max(float(np.linalg.norm(h, 2)) for h in self.generators)


@dataclass(frozen=True, eq=False)
class DevelopmentResult:
    psi: np.ndarray
    interval: tuple[float, float]

    def __post_init__(self):
        arr = np.asarray(self.psi, dtype=complex).copy()
        arr.flags.writeable = False
        object.__setattr__(self, "psi", arr)


def _exp_i_hermitian(h: np.ndarray) -> np.ndarray:
    """exp(i h) for Hermitian h, unitary to rounding via eigendecomposition."""
    eigvals, eigvecs = np.linalg.eigh(h)
    return (eigvecs * np.exp(1j * eigvals)) @ eigvecs.conj().T


def develop(policy: UnitaryPolicy, s: Stream) -> DevelopmentResult:
    """Ordered product over segments of exp(i sum_j dgamma_j H_j)."""
    if s.dimension != policy.driver_dim:
        raise DimensionMismatchError(
            f"stream dimension {s.dimension} != policy driver dimension "
            f"{policy.driver_dim}"
        )
    psi = np.eye(policy.size, dtype=complex)
    for inc in s.increments():
        h = np.tensordot(inc, policy.generators, axes=(0, 0))
        psi = psi @ _exp_i_hermitian(h)
    return DevelopmentResult(psi, s.interval)


def unitarity_defect(psi: np.ndarray) -> float:
    """Frobenius norm of Psi* Psi - I."""
    u = psi.conj().T @ psi
    return float(np.linalg.norm(u - np.eye(u.shape[0])))


@dataclass(frozen=True, eq=False)
class MonteCarloDevelopment:
    mean: np.ndarray
    stderr: np.ndarray
    count: int


def expected_development(
    policy: UnitaryPolicy, sampler, count: int, seed: int = 0
) -> MonteCarloDevelopment:
    """Monte Carlo mean of the development over sampled streams.

    ``sampler(rng)`` must return a Stream.  The elementwise standard error
    combines real and imaginary scatter.  Samples are drawn and reduced in a
    fixed order, so results are reproducible for a given seed.
    """
    if count < 1:
        raise DomainError("count must be >= 1")
    rng = np.random.default_rng(seed)
    u = policy.size
    total = np.zeros((u, u), dtype=complex)
    total_sq = np.zeros((u, u))
    for _ in range(count):
        psi = develop(policy, sampler(rng)).psi
        total += psi
        total_sq += np.abs(psi) ** 2
    mean = total / count
    if count == 1:
        stderr = np.zeros((u, u))
    else:
        variance = np.maximum(total_sq / count - np.abs(mean) ** 2, 0.0)
        stderr = np.sqrt(variance / (count - 1))
    return MonteCarloDevelopment(mean, stderr, count)


def evaluate_signature(policy: UnitaryPolicy, sig: TruncatedTensor) -> np.ndarray:
    """Evaluate the truncated signature in the matrix algebra.

    sum_k i^k sum_w S_w H_{w_1} ... H_{w_k}: the linear functional of the
    signature that ``develop`` computes, truncated at the signature's depth.
    """
    if sig.dim != policy.driver_dim:
        raise DimensionMismatchError("signature and policy driver dimensions differ")
    d, u = policy.driver_dim, policy.size
    total = sig.levels[0][0] * np.eye(u, dtype=complex)
    words = np.eye(u, dtype=complex)[None, :, :]
    step = 1j * policy.generators
    for k in range(1, sig.depth + 1):
        # matrix for w'j is (matrix for w') @ iH_j; flat order w'*d + j
        words = np.einsum("wab,jbc->wjac", words, step).reshape(d**k, u, u)
        total = total + np.tensordot(sig.levels[k], words, axes=(0, 0))
    return total


def development_tail_bound(policy: UnitaryPolicy, l1_length: float, depth: int) -> float:
    """Operator-norm bound sum_{k > depth} (max_j |H_j| L)^k / k! on the truncation."""
    x = policy.max_generator_norm() * l1_length
    term = x ** (depth + 1) / math.factorial(depth + 1)
    total, k = 0.0, depth + 1
    while True:
        total += term
        k += 1
        term *= x / k
        if term <= 1e-17 * total or k > 10_000:
            break
    return total


def random_policy(size: int, driver_dim: int, seed=None) -> UnitaryPolicy:
    """Random traceless Hermitian generators, handy for tests and demos."""
    rng = np.random.default_rng(seed)
    gens = np.empty((driver_dim, size, size), dtype=complex)
    for j in range(driver_dim):
        g = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
        h = 0.5 * (g + g.conj().T)
        h -= np.trace(h) / size * np.eye(size)
        gens[j] = h
    return UnitaryPolicy(gens)
