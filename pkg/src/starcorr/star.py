"""Star-network inequalities built from full-correlation Bell matrices.

A scenario has ``N`` edge parties, each sharing one source with the central
node. Edge ``k`` has ``n_A^(k)`` binary settings; the node has one or more
inputs ``y``, each with its own outcome alphabet. Row ``i`` of every edge
matrix defines the quantity

    I_i = Σ_{x_1..x_N} M1[i,x_1] ... MN[i,x_N] <A_{x_1} ... A_{x_N} B_i>

where the node's contribution to ``B_i`` is ``(-1)^{f_i(b)}`` for the outcome
``b`` of input ``y_i``. N-local models satisfy ``Σ_i |I_i|^{1/N} <= (C_1...C_N)^{1/N}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .bell import BellMatrix, local_bound
from .errors import ValidationError

VIOLATION_TOL = 1e-9
NORMALIZATION_TOL = 1e-9
NEGATIVE_CLAMP = 1e-12
ZERO_I = 1e-15


@dataclass(frozen=True)
class NodeSetting:
    """Node input ``y`` used for row ``i`` together with the outcome map ``f``."""

    y: int
    f: tuple

    def __post_init__(self):
        f = tuple(int(v) for v in self.f)
        if any(v not in (0, 1) for v in f) or any(v not in (0, 1) for v in self.f):
            raise ValidationError(f"f table entries must be 0 or 1, got {list(self.f)}")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "y", int(self.y))

    def signs(self, width: int) -> np.ndarray:
        """``(-1)^{f(b)}`` padded with zeros up to ``width`` outcomes."""
        out = np.zeros(width)
        out[: len(self.f)] = 1.0 - 2.0 * np.array(self.f)
        return out


@dataclass(frozen=True, eq=False)
class StarScenario:
    edge_matrices: tuple
    node_settings: tuple
    node_alphabets: tuple

    def __init__(
        self,
        edge_matrices: Sequence[BellMatrix],
        node_settings: Sequence[NodeSetting],
        node_alphabets: Sequence[int] | Mapping[int, int],
    ):
        mats = tuple(m if isinstance(m, BellMatrix) else BellMatrix(m) for m in edge_matrices)
        if not mats:
            raise ValidationError("a star scenario needs at least one source")
        n_b = mats[0].n_B
        if any(m.n_B != n_b for m in mats):
            raise ValidationError("all edge matrices must have the same number of rows n_B")
        if isinstance(node_alphabets, Mapping):
            by_input = {int(k): int(v) for k, v in node_alphabets.items()}
            if sorted(by_input) != list(range(len(by_input))):
                raise ValidationError(f"node inputs must be numbered 0..n-1, got {sorted(by_input)}")
            alphabets = tuple(by_input[k] for k in range(len(by_input)))
        else:
            alphabets = tuple(int(a) for a in node_alphabets)
        if not alphabets or any(a < 1 for a in alphabets):
            raise ValidationError("node alphabets must be positive and non-empty")
        settings = tuple(s if isinstance(s, NodeSetting) else NodeSetting(**s) for s in node_settings)
        if len(settings) != n_b:
            raise ValidationError(f"need one node setting per row: {n_b} rows, {len(settings)} settings")
        for i, s in enumerate(settings):
            if not 0 <= s.y < len(alphabets):
                raise ValidationError(f"setting {i} refers to unknown node input {s.y}")
            if len(s.f) != alphabets[s.y]:
                raise ValidationError(
                    f"setting {i}: f table has {len(s.f)} entries, node input {s.y} has {alphabets[s.y]} outcomes"
                )
        object.__setattr__(self, "edge_matrices", mats)
        object.__setattr__(self, "node_settings", settings)
        object.__setattr__(self, "node_alphabets", alphabets)

    @classmethod
    def homogeneous(cls, m: BellMatrix, sources: int, node_settings, node_alphabets) -> StarScenario:
        if sources < 1:
            raise ValidationError("sources must be at least 1")
        return cls([m] * sources, node_settings, node_alphabets)

    @property
    def sources(self) -> int:
        return len(self.edge_matrices)

    @property
    def n_B(self) -> int:
        return self.edge_matrices[0].n_B

    @property
    def edge_setting_counts(self) -> tuple:
        return tuple(m.n_A for m in self.edge_matrices)

    @property
    def node_input_count(self) -> int:
        return len(self.node_alphabets)

    @property
    def is_homogeneous(self) -> bool:
        first = self.edge_matrices[0]
        return all(m == first for m in self.edge_matrices[1:])

    def with_edge_matrix(self, k: int, m: BellMatrix) -> StarScenario:
        mats = list(self.edge_matrices)
        mats[k] = m
        return StarScenario(mats, self.node_settings, self.node_alphabets)


def binary_node_settings(n_b: int) -> tuple[list[NodeSetting], list[int]]:
    """One binary node input per row with ``f(b) = b``."""
    return [NodeSetting(i, (0, 1)) for i in range(n_b)], [2] * n_b


@dataclass(frozen=True, eq=False)
class NetworkBehavior:
    """Conditional distribution ``P(a_1..a_N b | x_1..x_N y)``.

    ``table`` has axes ``(x_1, ..., x_N, y, a_1, ..., a_N, b)``; the ``b`` axis
    is padded to the largest alphabet and padded entries are zero.
    """

    edge_setting_counts: tuple
    node_alphabets: tuple
    table: np.ndarray

    def __post_init__(self):
        counts = tuple(int(c) for c in self.edge_setting_counts)
        alphabets = tuple(int(a) for a in self.node_alphabets)
        n = len(counts)
        t = np.array(self.table, dtype=float)
        expected = counts + (len(alphabets),) + (2,) * n + (max(alphabets),)
        if t.shape != expected:
            raise ValidationError(f"behavior table has shape {t.shape}, expected {expected}")
        if not np.all(np.isfinite(t)):
            raise ValidationError("behavior table must be finite")
        if t.min() < -NEGATIVE_CLAMP:
            raise ValidationError(f"negative probability {t.min():.3g}")
        t = np.clip(t, 0.0, None)
        for y, size in enumerate(alphabets):
            pad = np.take(t, y, axis=n)[..., size:]
            if pad.size and pad.max() > NEGATIVE_CLAMP:
                raise ValidationError(f"probability mass on undeclared outcome of node input {y}")
        sums = t.sum(axis=tuple(range(n + 1, 2 * n + 2)))
        if np.max(np.abs(sums - 1.0)) > NORMALIZATION_TOL:
            raise ValidationError(f"behavior not normalized: max deviation {np.max(np.abs(sums - 1.0)):.3g}")
        t.setflags(write=False)
        object.__setattr__(self, "edge_setting_counts", counts)
        object.__setattr__(self, "node_alphabets", alphabets)
        object.__setattr__(self, "table", t)

    @property
    def sources(self) -> int:
        return len(self.edge_setting_counts)

    def probability(self, xs: Sequence[int], y: int, a_s: Sequence[int], b: int) -> float:
        return float(self.table[tuple(xs) + (y,) + tuple(a_s) + (b,)])


@dataclass(frozen=True)
class StarEvaluation:
    I: np.ndarray
    s_net: float
    bound: float
    violated: bool


def _check_shapes(beh: NetworkBehavior, sc: StarScenario):
    if beh.edge_setting_counts != sc.edge_setting_counts:
        raise ValidationError(
            f"behavior edge settings {beh.edge_setting_counts} != scenario {sc.edge_setting_counts}"
        )
    if beh.node_alphabets != sc.node_alphabets:
        raise ValidationError(f"behavior node alphabets {beh.node_alphabets} != scenario {sc.node_alphabets}")


@lru_cache(maxsize=256)
def _cached_bound(m: BellMatrix) -> float:
    return local_bound(m).bound


def star_bound(sc: StarScenario) -> float:
    """Geometric mean of the per-edge local bounds."""
    bounds = [_cached_bound(m) for m in sc.edge_matrices]
    return float(np.exp(np.mean(np.log(bounds))))


@lru_cache(maxsize=16)
def _parity_signs(n: int) -> np.ndarray:
    """Tensor ``(-1)^{a_1+...+a_n}`` with ``n`` binary axes."""
    s = np.ones(())
    for _ in range(n):
        s = np.multiply.outer(s, np.array([1.0, -1.0]))
    s.setflags(write=False)
    return s


def correlators(beh: NetworkBehavior, sc: StarScenario, i: int) -> np.ndarray:
    """All ``<A_{x_1}..A_{x_N} B_i>`` for row ``i`` as an array indexed by ``x⃗``."""
    _check_shapes(beh, sc)
    if not 0 <= i < sc.n_B:
        raise ValidationError(f"row index {i} out of range 0..{sc.n_B - 1}")
    n = sc.sources
    s = sc.node_settings[i]
    block = np.take(beh.table, s.y, axis=n)
    weights = np.multiply.outer(_parity_signs(n), s.signs(block.shape[-1]))
    return np.tensordot(block, weights, axes=n + 1)


def network_correlator(beh: NetworkBehavior, sc: StarScenario, i: int, xs: Sequence[int]) -> float:
    """``Σ_{a⃗,b} (-1)^{a_1+...+a_N+f_i(b)} P(a⃗ b | x⃗ y_i)``."""
    xs = tuple(int(x) for x in xs)
    if len(xs) != sc.sources or any(not 0 <= x < c for x, c in zip(xs, sc.edge_setting_counts)):
        raise ValidationError(f"edge settings {xs} out of range for {sc.edge_setting_counts}")
    return float(correlators(beh, sc, i)[xs])


def i_values(beh: NetworkBehavior, sc: StarScenario) -> np.ndarray:
    out = np.empty(sc.n_B)
    for i in range(sc.n_B):
        c = correlators(beh, sc, i)
        for m in sc.edge_matrices:
            c = np.tensordot(m.m[i], c, axes=([0], [0]))
        out[i] = float(c)
    return out


def root_sum(I: Sequence[float], sources: int) -> float:
    """``Σ_i |I_i|^{1/N}``, with magnitudes below 1e-15 counted as zero."""
    mags = np.abs(np.asarray(I, dtype=float))
    roots = np.zeros_like(mags)
    nz = mags >= ZERO_I
    roots[nz] = np.exp(np.log(mags[nz]) / sources)
    return float(roots.sum())


def evaluate(beh: NetworkBehavior, sc: StarScenario, tol: float = VIOLATION_TOL) -> StarEvaluation:
    I = i_values(beh, sc)
    s_net = root_sum(I, sc.sources)
    bound = star_bound(sc)
    I.setflags(write=False)
    return StarEvaluation(I=I, s_net=s_net, bound=bound, violated=bool(s_net > bound + tol))


@dataclass(frozen=True)
class ProductBound:
    geometric_mean: float
    holds: bool


def product_bound_check(per_edge_bell_values: Sequence[float], s_net: float, tol: float = VIOLATION_TOL) -> ProductBound:
    """Compare ``s_net`` with the geometric mean of ``N`` independent Bell values.

    For product node measurements the star value can never exceed this mean.
    """
    vals = np.abs(np.asarray(per_edge_bell_values, dtype=float))
    if vals.ndim != 1 or vals.size == 0 or not np.all(np.isfinite(vals)) or not np.isfinite(s_net):
        raise ValidationError("per-edge Bell values and s_net must be finite")
    gm = 0.0 if np.any(vals == 0) else float(np.exp(np.mean(np.log(vals))))
    return ProductBound(geometric_mean=gm, holds=bool(s_net <= gm + tol))
