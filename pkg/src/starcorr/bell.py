"""Full-correlation bipartite Bell inequalities ``Σ M[y,x] <A_x B_y> <= C``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import CapacityError, ValidationError
from .qmath import DensityMatrix, Observable, expectation

MAX_SETTINGS = 30
TIE_TOL = 1e-9
_CHUNK_BITS = 16


@dataclass(frozen=True, eq=False)
class BellMatrix:
    """Coefficient matrix with ``n_B`` rows (Bob's settings) and ``n_A`` columns (Alice's)."""

    m: np.ndarray

    def __post_init__(self):
        try:
            m = np.array(self.m, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"Bell matrix is not real-valued: {exc}") from None
        if m.ndim != 2 or 0 in m.shape:
            raise ValidationError(f"Bell matrix must be a non-empty 2-D array, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("Bell matrix entries must be finite")
        if not np.any(m != 0):
            raise ValidationError("Bell matrix must have at least one nonzero entry")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @property
    def n_B(self) -> int:
        return self.m.shape[0]

    @property
    def n_A(self) -> int:
        return self.m.shape[1]

    def transpose(self) -> BellMatrix:
        return BellMatrix(self.m.T)

    def scaled(self, c: float) -> BellMatrix:
        return BellMatrix(c * self.m)

    def __eq__(self, other):
        return isinstance(other, BellMatrix) and self.m.shape == other.m.shape and bool(np.all(self.m == other.m))

    def __hash__(self):
        return hash((self.m.shape, self.m.tobytes()))


def chsh_matrix() -> BellMatrix:
    """CHSH with entries ½(-1)^{xy}; local bound 1."""
    return BellMatrix(0.5 * np.array([[1.0, 1.0], [1.0, -1.0]]))


def elegant_matrix() -> BellMatrix:
    """The 3×4 'elegant' inequality; local bound 6, quantum maximum 4√3."""
    return BellMatrix(
        [
            [1, 1, -1, -1],
            [1, -1, 1, -1],
            [1, -1, -1, 1],
        ]
    )


@dataclass(frozen=True)
class DeterministicAssignment:
    """One ±1 output per setting."""

    values: tuple

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        if any(v not in (1, -1) for v in vals) or any(v not in (1, -1) for v in self.values):
            raise ValidationError(f"assignment entries must be exactly ±1, got {self.values}")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)

    def negated(self) -> DeterministicAssignment:
        return DeterministicAssignment(tuple(-v for v in self.values))

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)

    @classmethod
    def from_index(cls, k: int, n: int) -> DeterministicAssignment:
        """Bit ``x`` of ``k`` maps to the sign ``1 - 2*bit``."""
        return cls(tuple(1 - 2 * ((k >> x) & 1) for x in range(n)))


def transformed(m: BellMatrix, a: DeterministicAssignment) -> np.ndarray:
    """Vector ``Â_y = Σ_x M[y,x] a_x``."""
    if len(a) != m.n_A:
        raise ValidationError(f"assignment has length {len(a)}, matrix has {m.n_A} columns")
    return m.m @ a.as_array()


def _sign_block(start: int, stop: int, n: int) -> np.ndarray:
    ks = np.arange(start, stop, dtype=np.int64)
    bits = (ks[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1
    return 1.0 - 2.0 * bits


def enumerate_transformed(m: BellMatrix) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(first_index, Y)`` blocks covering every assignment in index order.

    ``Y[j]`` is the transformed vector of assignment ``first_index + j``.
    """
    n = m.n_A
    if n > MAX_SETTINGS:
        raise CapacityError(f"n_A = {n} exceeds the enumeration limit {MAX_SETTINGS}")
    total = 1 << n
    step = 1 << _CHUNK_BITS
    for start in range(0, total, step):
        stop = min(total, start + step)
        yield start, _sign_block(start, stop, n) @ m.m.T


@dataclass(frozen=True)
class LocalBound:
    bound: float
    maximizers: list


def local_bound(m: BellMatrix, tie_tol: float = TIE_TOL) -> LocalBound:
    """Classical bound ``C = max_a Σ_y |Σ_x M[y,x] a_x|`` by exhaustive enumeration.

    Every assignment within ``tie_tol`` (relative to ``max(1, C)``) of the
    maximum is reported, in enumeration order, so both members of each
    ``±a`` pair appear.
    """
    best = -np.inf
    values = []
    for start, y in enumerate_transformed(m):
        v = np.abs(y).sum(axis=1)
        values.append((start, v))
        best = max(best, float(v.max()))
    cut = best - tie_tol * max(1.0, abs(best))
    maximizers = []
    for start, v in values:
        for j in np.flatnonzero(v >= cut):
            maximizers.append(DeterministicAssignment.from_index(start + int(j), m.n_A))
    return LocalBound(best, maximizers)


def correlator(state: DensityMatrix, alice: Observable, bob: Observable) -> float:
    """``Tr[ρ (A ⊗ B)]``."""
    if alice.dim * bob.dim != state.dim:
        raise ValidationError(
            f"state dimension {state.dim} != {alice.dim} x {bob.dim} of the observables"
        )
    return expectation(state, np.kron(alice.matrix, bob.matrix))


def correlator_table(state: DensityMatrix, alice: Sequence[Observable], bob: Sequence[Observable]) -> np.ndarray:
    """Matrix ``E[y, x] = <A_x B_y>``, laid out like the Bell matrix."""
    return np.array([[correlator(state, a, b) for a in alice] for b in bob])


def _check_strategy(m: BellMatrix, alice, bob):
    if len(alice) != m.n_A or len(bob) != m.n_B:
        raise ValidationError(
            f"need {m.n_A} Alice and {m.n_B} Bob observables, got {len(alice)} and {len(bob)}"
        )


def row_terms(m: BellMatrix, state: DensityMatrix, alice: Sequence[Observable], bob: Sequence[Observable]) -> np.ndarray:
    """Per-row contributions ``<Â_y B_y> = Σ_x M[y,x] <A_x B_y>``."""
    _check_strategy(m, alice, bob)
    return np.sum(m.m * correlator_table(state, alice, bob), axis=1)


def bell_value(m: BellMatrix, state: DensityMatrix, alice: Sequence[Observable], bob: Sequence[Observable]) -> float:
    """Quantum value ``S = Σ_{x,y} M[y,x] Tr[ρ (A_x ⊗ B_y)]``."""
    return float(row_terms(m, state, alice, bob).sum())
