"""Classical N-local strategies on star networks.

Each source ``k`` emits a hidden variable ``λ_k`` from a finite alphabet with
weights ``q_k``. Edge party ``k`` answers ``A^k[λ_k, x_k] ∈ {±1}`` and the node
answers ``B[y][λ_1, ..., λ_N]``, an outcome index for input ``y``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import product
from typing import Iterator, Sequence

import numpy as np

from .bell import BellMatrix, DeterministicAssignment, enumerate_transformed, local_bound, transformed
from .errors import NumericFailure, PreconditionError, ValidationError
from .star import NetworkBehavior, StarScenario, evaluate, star_bound

WEIGHT_TOL = 1e-12
SATURATION_TOL = 1e-6
I_MATCH_TOL = 1e-9
SATURATING_TOL = 1e-9
MAX_SAMPLE_SUPPORT = 4


def _weights(w) -> np.ndarray:
    w = np.array(w, dtype=float).reshape(-1)
    if w.size == 0 or not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValidationError("weights must be a non-empty vector of non-negative reals")
    if abs(w.sum() - 1.0) > WEIGHT_TOL:
        raise ValidationError(f"weights sum to {w.sum():.15g}, expected 1")
    w.setflags(write=False)
    return w


def _sign_table(t, name: str) -> np.ndarray:
    arr = np.array(t)
    if arr.ndim != 2 or 0 in arr.shape:
        raise ValidationError(f"{name}: expected a 2-D table (λ, x), got shape {arr.shape}")
    if not np.all((arr == 1) | (arr == -1)):
        raise ValidationError(f"{name}: entries must be exactly ±1")
    arr = arr.astype(np.int8)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class NLocalStrategy:
    weights: tuple
    edge_tables: tuple
    node_table: tuple

    def __post_init__(self):
        weights = tuple(_weights(w) for w in self.weights)
        tables = tuple(_sign_table(t, f"edge table {k}") for k, t in enumerate(self.edge_tables))
        if len(weights) != len(tables) or not weights:
            raise ValidationError("need one weight vector and one edge table per source")
        for k, (w, t) in enumerate(zip(weights, tables)):
            if t.shape[0] != w.size:
                raise ValidationError(f"edge table {k} has {t.shape[0]} rows for {w.size} hidden values")
        support = tuple(w.size for w in weights)
        node = []
        for y, t in enumerate(self.node_table):
            arr = np.array(t)
            if arr.shape != support:
                raise ValidationError(f"node table for input {y} has shape {arr.shape}, expected {support}")
            if arr.size and (not np.issubdtype(arr.dtype, np.integer) and not np.all(arr == np.round(arr))):
                raise ValidationError(f"node table for input {y} must hold integer outcomes")
            arr = arr.astype(np.int64)
            if arr.min() < 0:
                raise ValidationError(f"node table for input {y} has a negative outcome")
            arr.setflags(write=False)
            node.append(arr)
        if not node:
            raise ValidationError("node table needs at least one input")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "edge_tables", tables)
        object.__setattr__(self, "node_table", tuple(node))

    @property
    def sources(self) -> int:
        return len(self.weights)

    @property
    def supports(self) -> tuple:
        return tuple(w.size for w in self.weights)


def behavior_from_strategy(st: NLocalStrategy, sc: StarScenario) -> NetworkBehavior:
    """Distribution generated by ``st``: product of source weights times output indicators."""
    n = sc.sources
    if st.sources != n:
        raise ValidationError(f"strategy has {st.sources} sources, scenario has {n}")
    for k, (t, n_a) in enumerate(zip(st.edge_tables, sc.edge_setting_counts)):
        if t.shape[1] != n_a:
            raise ValidationError(f"edge table {k} covers {t.shape[1]} settings, scenario needs {n_a}")
    if len(st.node_table) != sc.node_input_count:
        raise ValidationError(f"node table covers {len(st.node_table)} inputs, scenario has {sc.node_input_count}")
    width = max(sc.node_alphabets)
    for y, (t, size) in enumerate(zip(st.node_table, sc.node_alphabets)):
        if t.max() >= size:
            raise ValidationError(f"node outcome {t.max()} outside alphabet of size {size} for input {y}")

    operands = []
    for k, (w, t) in enumerate(zip(st.weights, st.edge_tables)):
        # E[λ, x, a] = q(λ) [a == (1 - A[λ, x]) / 2]
        e = np.zeros(t.shape + (2,))
        e[..., 0] = t == 1
        e[..., 1] = t == -1
        operands += [e * w[:, None, None], [k, n + k, 2 * n + k]]
    node = np.stack([np.eye(width)[t] for t in st.node_table], axis=n)
    y_ax, b_ax = 3 * n, 3 * n + 1
    operands += [node, list(range(n)) + [y_ax, b_ax]]
    out = list(range(n, 2 * n)) + [y_ax] + list(range(2 * n, 3 * n)) + [b_ax]
    table = np.einsum(*operands, out)
    return NetworkBehavior(sc.edge_setting_counts, sc.node_alphabets, table)


def _node_signs_by_outcome(sc: StarScenario, y: int) -> tuple[list[int], np.ndarray]:
    rows = [i for i, s in enumerate(sc.node_settings) if s.y == y]
    signs = np.array([[1 - 2 * sc.node_settings[i].f[b] for i in rows] for b in range(sc.node_alphabets[y])])
    return rows, signs.reshape(sc.node_alphabets[y], len(rows))


def node_outcomes_for_signs(sc: StarScenario, signs: Sequence[int]) -> list[int]:
    """Node outcome per input realizing ``(-1)^{f_i(b)} = signs[i]`` for every row."""
    outcomes = []
    for y in range(sc.node_input_count):
        rows, table = _node_signs_by_outcome(sc, y)
        want = np.array([signs[i] for i in rows])
        hits = np.flatnonzero(np.all(table == want, axis=1))
        if hits.size == 0:
            raise ValidationError(f"node input {y} has no outcome with signs {want.tolist()}")
        outcomes.append(int(hits[0]))
    return outcomes


def realizable_signs(sc: StarScenario, preferred: Sequence[int]) -> tuple:
    """Closest sign vector the node can output deterministically.

    For each input the outcome agreeing with ``preferred`` on the most rows is
    chosen (lowest outcome on ties).
    """
    signs = [0] * sc.n_B
    for y in range(sc.node_input_count):
        rows, table = _node_signs_by_outcome(sc, y)
        if not rows:
            continue
        want = np.array([preferred[i] for i in rows])
        best = int(np.argmax((table == want).sum(axis=1)))
        for i, s in zip(rows, table[best]):
            signs[i] = int(s)
    return tuple(signs)


@dataclass(frozen=True, eq=False)
class ReducedStrategy:
    """Shared edge strategy with a deterministic node (signs ``b_i``)."""

    shared_edge_table: np.ndarray
    shared_weights: np.ndarray
    node_signs: tuple

    def __post_init__(self):
        table = _sign_table(self.shared_edge_table, "shared edge table")
        w = _weights(self.shared_weights)
        if table.shape[0] != w.size:
            raise ValidationError("shared edge table and weights disagree on the hidden alphabet")
        signs = tuple(int(s) for s in self.node_signs)
        if any(s not in (1, -1) for s in signs):
            raise ValidationError("node signs must be ±1")
        object.__setattr__(self, "shared_edge_table", table)
        object.__setattr__(self, "shared_weights", w)
        object.__setattr__(self, "node_signs", signs)

    def mean_transformed(self, m: BellMatrix) -> np.ndarray:
        """``<Â_i> = Σ_λ w(λ) Σ_x M[i,x] A[λ,x]``."""
        return self.shared_weights @ (self.shared_edge_table @ m.m.T)

    def predicted_I(self, m: BellMatrix, sources: int) -> np.ndarray:
        return np.array(self.node_signs) * self.mean_transformed(m) ** sources

    def to_strategy(self, sc: StarScenario) -> NLocalStrategy:
        """Copy the shared edge strategy onto every source; node answers deterministically."""
        if len(self.node_signs) != sc.n_B:
            raise ValidationError(f"{len(self.node_signs)} node signs for {sc.n_B} rows")
        outcomes = node_outcomes_for_signs(sc, self.node_signs)
        n = sc.sources
        shape = (self.shared_weights.size,) * n
        return NLocalStrategy(
            weights=[self.shared_weights] * n,
            edge_tables=[self.shared_edge_table] * n,
            node_table=[np.full(shape, b, dtype=np.int64) for b in outcomes],
        )


@dataclass(frozen=True)
class ClassicalMax:
    value: float
    witness: ReducedStrategy | None
    strategy: NLocalStrategy
    heuristic: bool


def _signs_of(v: np.ndarray) -> tuple:
    return tuple(1 if s >= 0 else -1 for s in v)


def classical_max(sc: StarScenario) -> ClassicalMax:
    """Largest ``S_net`` reachable by an N-local strategy.

    With identical edge matrices this is exact: a deterministic maximizer of
    the local bound, copied onto every edge, reaches ``C``. With distinct
    matrices only deterministic edge choices are searched and the value is
    flagged as heuristic (a lower bound).
    """
    n = sc.sources
    if sc.is_homogeneous:
        m = sc.edge_matrices[0]
        lb = local_bound(m)
        best = lb.maximizers[0]
        y = transformed(m, best)
        signs = realizable_signs(sc, _signs_of(y**n))
        witness = ReducedStrategy(np.array([best.values]), np.array([1.0]), signs)
        return ClassicalMax(lb.bound, witness, witness.to_strategy(sc), heuristic=False)

    # heterogeneous: coordinate ascent over per-edge deterministic assignments
    choices = [np.array(local_bound(m).maximizers[0].values) for m in sc.edge_matrices]
    roots = [np.abs(sc.edge_matrices[k].m @ choices[k]) ** (1.0 / n) for k in range(n)]
    current = float(np.sum(np.prod(roots, axis=0)))
    improved = True
    while improved:
        improved = False
        for k, m in enumerate(sc.edge_matrices):
            others = np.prod([r for j, r in enumerate(roots) if j != k], axis=0) if n > 1 else np.ones(m.n_B)
            for start, ys_block in enumerate_transformed(m):
                vals = (np.abs(ys_block) ** (1.0 / n)) @ others
                j = int(np.argmax(vals))
                if vals[j] > current + 1e-12:
                    choices[k] = np.array(DeterministicAssignment.from_index(start + j, m.n_A).values)
                    roots[k] = np.abs(m.m @ choices[k]) ** (1.0 / n)
                    current = float(vals[j])
                    improved = True
    ys = np.prod([sc.edge_matrices[k].m @ choices[k] for k in range(n)], axis=0)
    outcomes = node_outcomes_for_signs(sc, realizable_signs(sc, _signs_of(ys)))
    strategy = NLocalStrategy(
        weights=[[1.0]] * n,
        edge_tables=[c[None, :] for c in choices],
        node_table=[np.full((1,) * n, b, dtype=np.int64) for b in outcomes],
    )
    return ClassicalMax(current, None, strategy, heuristic=True)


def _sign_consistent_flips(ys: np.ndarray, scale: float) -> np.ndarray:
    """Per-row flips ``ε`` such that every column of ``ε·ys`` has one sign.

    Solves ``ε_λ σ_i = sign(ys[λ, i])`` over the nonzero entries by
    breadth-first propagation. Raises :class:`NumericFailure` if the
    constraints are contradictory.
    """
    n_l, n_b = ys.shape
    nz = np.abs(ys) > 1e-9 * scale
    eps = np.zeros(n_l, dtype=int)
    sigma = np.zeros(n_b, dtype=int)
    for root in range(n_l):
        if eps[root]:
            continue
        eps[root] = 1
        queue = deque([("l", root)])
        while queue:
            kind, idx = queue.popleft()
            if kind == "l":
                for i in np.flatnonzero(nz[idx]):
                    want = eps[idx] * int(np.sign(ys[idx, i]))
                    if sigma[i] == 0:
                        sigma[i] = want
                        queue.append(("i", i))
                    elif sigma[i] != want:
                        raise NumericFailure("edge responses are not sign-consistent; strategy is not optimal")
            else:
                for lam in np.flatnonzero(nz[:, idx]):
                    want = sigma[idx] * int(np.sign(ys[lam, idx]))
                    if eps[lam] == 0:
                        eps[lam] = want
                        queue.append(("l", lam))
                    elif eps[lam] != want:
                        raise NumericFailure("edge responses are not sign-consistent; strategy is not optimal")
    return eps


def reduce(st: NLocalStrategy, sc: StarScenario) -> ReducedStrategy:
    """Replace a bound-saturating strategy by one with a deterministic node.

    The node's sign dependence on each hidden variable is absorbed into the
    edge responses, edge 1's strategy is copied onto every edge, and the
    node signs ``b_i`` are fixed so the ``I_i`` are unchanged.
    """
    if not sc.is_homogeneous:
        raise PreconditionError("reduction needs identical edge matrices")
    ev = evaluate(behavior_from_strategy(st, sc), sc)
    if abs(ev.s_net - ev.bound) > SATURATION_TOL:
        raise PreconditionError(f"strategy does not saturate the bound: S_net={ev.s_net:.12g}, bound={ev.bound:.12g}")
    m = sc.edge_matrices[0]
    n = sc.sources
    keep = np.flatnonzero(st.weights[0] > 0)
    table = st.edge_tables[0][keep].astype(int)
    weights = st.weights[0][keep]
    weights = weights / weights.sum()
    ys = table @ m.m.T
    eps = _sign_consistent_flips(ys, max(1.0, float(np.abs(ys).max())))
    new_table = eps[:, None] * table
    mean = weights @ (new_table @ m.m.T)
    # b_i carries the sign of I_i; rows with I_i = 0 follow the sign of <Â_i>^N
    powers = mean**n
    target = np.where(np.abs(ev.I) > I_MATCH_TOL, np.sign(ev.I), 1.0)
    signs = tuple(int(t) if p >= 0 else -int(t) for t, p in zip(target, powers))
    reduced = ReducedStrategy(new_table, weights, signs)
    got = reduced.predicted_I(m, n)
    if np.max(np.abs(got - ev.I)) > I_MATCH_TOL:
        raise NumericFailure(f"reduced strategy changes I by {np.max(np.abs(got - ev.I)):.3g}")
    return reduced


@dataclass(frozen=True, eq=False)
class SignClass:
    """Bound-saturating assignments whose transformed vectors agree in sign per row.

    ``sign_pattern[i]`` is +1 or -1, or 0 where every member has ``Y_i = 0``.
    """

    members: tuple
    sign_pattern: tuple
    matrix: BellMatrix
    sources: int

    @property
    def assignments(self) -> list:
        return [x for x, _ in self.members]

    @property
    def vectors(self) -> np.ndarray:
        return np.array([y for _, y in self.members])

    def point(self, p: Sequence[float], node_signs: Sequence[int] | None = None) -> np.ndarray:
        """``I_i = b_i (Σ_r p_r Y_{r,i})^N`` for mixture weights ``p`` over the members."""
        p = _weights(p)
        if p.size != len(self.members):
            raise ValidationError(f"{p.size} weights for {len(self.members)} class members")
        b = np.ones(self.matrix.n_B) if node_signs is None else np.array(node_signs, dtype=float)
        return b * (p @ self.vectors) ** self.sources

    def reduced_strategy(self, p: Sequence[float], node_signs: Sequence[int] | None = None) -> ReducedStrategy:
        b = (1,) * self.matrix.n_B if node_signs is None else tuple(node_signs)
        return ReducedStrategy(np.array([x.values for x in self.assignments]), p, b)


def saturating_families(m: BellMatrix, sources: int, tol: float = SATURATING_TOL) -> list[SignClass]:
    """All maximal sign-consistent classes of bound-saturating assignments.

    Mixing the members of one class (same weights on every edge) with a
    deterministic node reaches every saturating ``{I_i}``; the converse
    holds too. Classes come out ordered by sign pattern, with ``+`` before
    ``-`` before unconstrained.
    """
    if sources < 1:
        raise ValidationError("sources must be at least 1")
    lb = local_bound(m, tie_tol=tol)
    members = [(x, transformed(m, x)) for x in lb.maximizers]
    ys = np.array([y for _, y in members])
    zero = np.abs(ys) <= tol * max(1.0, lb.bound)
    sgn = np.where(zero, 0, np.sign(ys)).astype(int)

    groups = {}
    for pattern in product((1, -1), repeat=m.n_B):
        ok = np.all((sgn == 0) | (sgn == np.array(pattern)), axis=1)
        idx = tuple(np.flatnonzero(ok))
        if idx and idx not in groups:
            groups[idx] = pattern
    maximal = [idx for idx in groups if not any(set(idx) < set(other) for other in groups)]

    classes = []
    for idx in maximal:
        sub = sgn[list(idx)]
        pattern = tuple(int(s[s != 0][0]) if np.any(s != 0) else 0 for s in sub.T)
        classes.append(SignClass(tuple(members[j] for j in idx), pattern, m, sources))
    rank = {1: 0, -1: 1, 0: 2}
    classes.sort(key=lambda c: tuple(rank[s] for s in c.sign_pattern))
    return classes


def sample_strategies(sc: StarScenario, count: int, seed: int) -> Iterator[NLocalStrategy]:
    """Reproducible pseudo-random N-local strategies with hidden alphabets of size <= 4.

    Half of the draws use edge rows taken from the local-bound maximizers so
    that near-optimal strategies are well represented.
    """
    if count < 1:
        raise ValidationError("count must be at least 1")
    rng = np.random.default_rng(seed)
    maximizers = [np.array([x.values for x in local_bound(m).maximizers]) for m in sc.edge_matrices]
    for _ in range(count):
        structured = rng.random() < 0.5
        weights, tables = [], []
        for k, n_a in enumerate(sc.edge_setting_counts):
            size = int(rng.integers(1, MAX_SAMPLE_SUPPORT + 1))
            weights.append(rng.dirichlet(np.ones(size)))
            if structured:
                tables.append(maximizers[k][rng.integers(0, len(maximizers[k]), size=size)])
            else:
                tables.append(rng.choice(np.array([-1, 1]), size=(size, n_a)))
        shape = tuple(len(w) for w in weights)
        node = [rng.integers(0, a, size=shape) for a in sc.node_alphabets]
        yield NLocalStrategy(weights, tables, node)


__all__ = [
    "ClassicalMax",
    "NLocalStrategy",
    "ReducedStrategy",
    "SignClass",
    "behavior_from_strategy",
    "classical_max",
    "node_outcomes_for_signs",
    "realizable_signs",
    "reduce",
    "sample_strategies",
    "saturating_families",
    "star_bound",
]
