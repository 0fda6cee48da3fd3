"""Dense complex linear algebra and the quantum primitives built on it.

Matrices are plain ``numpy`` complex128 arrays. The typed wrappers below
(:class:`DensityMatrix`, :class:`Observable`, :class:`ProjectiveMeasurement`)
validate their invariants once at construction and hold read-only copies, so
instances can be shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import NumericFailure, ValidationError

ATOL = 1e-9
"""Default absolute tolerance for invariant checks and Born-rule sums."""

ALGEBRA_TOL = 1e-12
"""Tolerance for algebraic identities on matrices of dimension <= 16."""

MAX_DIM = 2 ** 12

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

for _m in (IDENTITY2, *PAULIS):
    _m.setflags(write=False)


def as_matrix(data, name: str = "matrix", square: bool = False) -> np.ndarray:
    """Return a read-only complex128 copy of ``data`` after shape/finiteness checks."""
    try:
        m = np.array(data, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name}: not a numeric matrix ({exc})") from None
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValidationError(f"{name}: expected a non-empty 2-D matrix, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise ValidationError(f"{name}: expected a square matrix, got shape {m.shape}")
    if m.shape[0] > MAX_DIM or m.shape[1] > MAX_DIM:
        raise ValidationError(f"{name}: dimension exceeds {MAX_DIM}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name}: entries must be finite")
    m.setflags(write=False)
    return m


def hermiticity_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T)))


def hermitian_eigenvalues(m: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix.

    Dimension 2 uses the closed form of the characteristic polynomial; larger
    matrices go through LAPACK's ``eigvalsh``. Both are deterministic.
    """
    if m.shape == (2, 2):
        a, d = m[0, 0].real, m[1, 1].real
        mean = 0.5 * (a + d)
        radius = float(np.hypot(0.5 * (a - d), abs(m[0, 1])))
        return np.array([mean - radius, mean + radius])
    return np.linalg.eigvalsh(m)


def tensor(a, b) -> np.ndarray:
    """Kronecker product ``a ⊗ b``."""
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


def tensor_all(ops: Sequence) -> np.ndarray:
    """Left-folded Kronecker product of a non-empty sequence of matrices."""
    if len(ops) == 0:
        raise ValidationError("tensor_all needs at least one operand")
    return reduce(np.kron, [as_matrix(op, "operand") for op in ops])


def subsystem_permutation(dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Permutation matrix that reorders tensor factors.

    For operators ``X_j`` acting on factors of dimension ``dims[j]``, the
    returned ``P`` satisfies ``P (X_0 ⊗ ... ⊗ X_n) P.T == X_order[0] ⊗ ... ⊗ X_order[n]``.
    """
    dims = [int(d) for d in dims]
    if sorted(order) != list(range(len(dims))):
        raise ValidationError(f"order {list(order)} is not a permutation of 0..{len(dims) - 1}")
    total = int(np.prod(dims))
    # row = flat index in the new factor order, column = flat index in the old one
    old_of_new = np.transpose(np.arange(total).reshape(dims), axes=list(order)).reshape(-1)
    perm = np.zeros((total, total))
    perm[np.arange(total), old_of_new] = 1.0
    return perm


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A unit-trace positive semidefinite Hermitian matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix, "density matrix", square=True)
        object.__setattr__(self, "matrix", m)
        if hermiticity_defect(m) > ATOL:
            raise ValidationError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > ATOL:
            raise ValidationError(f"density matrix trace is {np.trace(m).real:.12g}, expected 1")
        if hermitian_eigenvalues(m)[0] < -ATOL:
            raise ValidationError("density matrix has a negative eigenvalue")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_ket(cls, ket) -> DensityMatrix:
        psi = np.asarray(ket, dtype=complex).reshape(-1)
        norm = np.linalg.norm(psi)
        if not np.isfinite(norm) or norm == 0:
            raise ValidationError("cannot build a state from a zero or non-finite vector")
        psi = psi / norm
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> DensityMatrix:
        return cls(np.eye(dim, dtype=complex) / dim)


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian operator with spectrum inside [-1, 1] (a binary-outcome correlator)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix, "observable", square=True)
        object.__setattr__(self, "matrix", m)
        if hermiticity_defect(m) > ATOL:
            raise ValidationError("observable is not Hermitian")
        ev = hermitian_eigenvalues(m)
        if ev[0] < -1 - ATOL or ev[-1] > 1 + ATOL:
            raise ValidationError("observable eigenvalues must lie in [-1, 1]")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def is_dichotomic(self, tol: float = ATOL) -> bool:
        """True when every eigenvalue is +1 or -1 within ``tol``."""
        ev = hermitian_eigenvalues(self.matrix)
        return bool(np.all(np.abs(np.abs(ev) - 1.0) <= tol))

    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenprojectors ``(Π_+, Π_-)``, i.e. outcome 0 and outcome 1.

        Only defined for observables whose eigenvalues are exactly ±1.
        """
        if not self.is_dichotomic():
            raise ValidationError("observable does not have ±1 eigenvalues; no projective split")
        eye = np.eye(self.dim)
        return (eye + self.matrix) / 2, (eye - self.matrix) / 2

    def transpose(self) -> Observable:
        return Observable(self.matrix.T)


@dataclass(frozen=True, eq=False)
class ProjectiveMeasurement:
    """Complete set of mutually orthogonal projectors, one per outcome."""

    projectors: tuple

    def __post_init__(self):
        projs = tuple(as_matrix(p, f"projector {k}", square=True) for k, p in enumerate(self.projectors))
        if not projs:
            raise ValidationError("a measurement needs at least one outcome")
        dim = projs[0].shape[0]
        if any(p.shape != (dim, dim) for p in projs):
            raise ValidationError("projectors have inconsistent dimensions")
        for k, p in enumerate(projs):
            if hermiticity_defect(p) > ATOL or np.max(np.abs(p @ p - p)) > ATOL:
                raise ValidationError(f"projector {k} is not an orthogonal projector")
        if np.max(np.abs(sum(projs) - np.eye(dim))) > ATOL:
            raise ValidationError("projectors do not sum to the identity")
        for i in range(len(projs)):
            for j in range(i + 1, len(projs)):
                if np.max(np.abs(projs[i] @ projs[j])) > ATOL:
                    raise ValidationError(f"projectors {i} and {j} are not orthogonal")
        object.__setattr__(self, "projectors", projs)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def outcome_count(self) -> int:
        return len(self.projectors)

    def probabilities(self, state: DensityMatrix) -> np.ndarray:
        return np.array([expectation(state, p) for p in self.projectors])

    @classmethod
    def from_observable(cls, obs: Observable) -> ProjectiveMeasurement:
        return cls(obs.projectors())


def bloch_to_observable(v) -> Observable:
    """``v·σ`` for a real 3-vector with ``|v| <= 1``."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise ValidationError("Bloch vector must be 3 finite reals")
    if np.linalg.norm(v) > 1 + ATOL:
        raise ValidationError(f"Bloch vector norm {np.linalg.norm(v):.12g} exceeds 1")
    return Observable(v[0] * SIGMA_X + v[1] * SIGMA_Y + v[2] * SIGMA_Z)


PSI00_KET = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def psi00() -> DensityMatrix:
    """The maximally entangled state (|00> + |11>)/√2."""
    return DensityMatrix.from_ket(PSI00_KET)


def bell_basis_2q() -> ProjectiveMeasurement:
    """Two-qubit Bell-state measurement.

    Outcome ``b = 2*b1 + b2`` projects onto ``(σ_z^b1 ⊗ σ_x^b2)|ψ00>``.
    """
    projs = []
    for b1 in (0, 1):
        for b2 in (0, 1):
            u = np.kron(np.linalg.matrix_power(SIGMA_Z, b1), np.linalg.matrix_power(SIGMA_X, b2))
            ket = u @ PSI00_KET
            projs.append(np.outer(ket, ket.conj()))
    return ProjectiveMeasurement(tuple(projs))


def werner(v: float, base: DensityMatrix) -> DensityMatrix:
    """Mix ``base`` with white noise: ``v·base + (1-v)·I/d``."""
    v = float(v)
    if not (0.0 <= v <= 1.0):
        raise ValidationError(f"visibility must lie in [0, 1], got {v}")
    d = base.dim
    return DensityMatrix(v * base.matrix + (1 - v) * np.eye(d) / d)


def expectation(state: DensityMatrix, op) -> float:
    """Born-rule value ``Tr(ρ·op)`` for a Hermitian ``op``."""
    op = op.matrix if isinstance(op, Observable) else np.asarray(op, dtype=complex)
    if op.shape != state.matrix.shape:
        raise ValidationError(f"operator shape {op.shape} does not match state dimension {state.dim}")
    value = np.einsum("ij,ji->", state.matrix, op)
    if abs(value.imag) >= ATOL:
        raise NumericFailure(f"expectation value has imaginary part {value.imag:.3g}")
    return float(value.real)


def random_unit_vector(rng: np.random.Generator, dim: int = 3) -> np.ndarray:
    v = rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_pure_state(rng: np.random.Generator, dim: int = 4) -> DensityMatrix:
    """Haar-random pure state."""
    return DensityMatrix.from_ket(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def random_density_matrix(rng: np.random.Generator, dim: int = 4, rank: int | None = None) -> DensityMatrix:
    """Random mixed state ``G G† / Tr(G G†)`` with Ginibre ``G``."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho / np.trace(rho).real)
