"""Quantum strategies on star networks.

Global tensor ordering is ``edge_1, node_1, edge_2, node_2, ...``: source
``k`` prepares ``ρ_k`` on ``(edge_k, node_k)``. Joint node measurements are
written on ``(node_1, ..., node_N)`` and moved into the interleaved layout by
an explicit subsystem permutation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .bell import BellMatrix, chsh_matrix, elegant_matrix, row_terms
from .errors import NumericFailure, ValidationError
from .qmath import (
    ATOL,
    PAULIS,
    SIGMA_X,
    SIGMA_Z,
    DensityMatrix,
    Observable,
    ProjectiveMeasurement,
    bell_basis_2q,
    bloch_to_observable,
    psi00,
    subsystem_permutation,
    tensor_all,
    werner,
)
from .star import NodeSetting, StarScenario, binary_node_settings, evaluate, NetworkBehavior

BISECTION_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class QuantumNetworkStrategy:
    """Per-source states, binary edge observables and node measurements.

    ``edge_observables[k][x]`` acts on edge subsystem ``k``;
    ``node_measurements[y]`` acts jointly on all node subsystems.
    """

    states: tuple
    edge_observables: tuple
    node_measurements: tuple

    def __post_init__(self):
        states = tuple(self.states)
        edges = tuple(tuple(obs) for obs in self.edge_observables)
        nodes = tuple(self.node_measurements)
        if not states or len(states) != len(edges):
            raise ValidationError("need one state and one list of edge observables per source")
        if not nodes:
            raise ValidationError("node needs at least one measurement")
        for k, (rho, obs) in enumerate(zip(states, edges)):
            if not obs:
                raise ValidationError(f"edge {k} has no observables")
            d_e = obs[0].dim
            if any(o.dim != d_e for o in obs):
                raise ValidationError(f"edge {k} observables have mixed dimensions")
            if rho.dim % d_e:
                raise ValidationError(f"state {k} of dimension {rho.dim} does not factor with edge dimension {d_e}")
            for x, o in enumerate(obs):
                if not o.is_dichotomic():
                    raise ValidationError(f"edge {k} observable {x} does not have ±1 eigenvalues")
        node_dim = int(np.prod([rho.dim // obs[0].dim for rho, obs in zip(states, edges)]))
        for y, meas in enumerate(nodes):
            if meas.dim != node_dim:
                raise ValidationError(f"node measurement {y} has dimension {meas.dim}, node space is {node_dim}")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "edge_observables", edges)
        object.__setattr__(self, "node_measurements", nodes)

    @property
    def sources(self) -> int:
        return len(self.states)

    @property
    def edge_dims(self) -> tuple:
        return tuple(obs[0].dim for obs in self.edge_observables)

    @property
    def node_dims(self) -> tuple:
        return tuple(rho.dim // d for rho, d in zip(self.states, self.edge_dims))

    def with_states(self, states: Sequence[DensityMatrix]) -> QuantumNetworkStrategy:
        return QuantumNetworkStrategy(tuple(states), self.edge_observables, self.node_measurements)

    def with_visibilities(self, visibilities: Sequence[float]) -> QuantumNetworkStrategy:
        """Replace every ``ρ_k`` with ``werner(v_k, ρ_k)``."""
        if len(visibilities) != self.sources:
            raise ValidationError(f"{len(visibilities)} visibilities for {self.sources} sources")
        return self.with_states([werner(v, rho) for v, rho in zip(visibilities, self.states)])


def binary_measurement(obs: Observable) -> ProjectiveMeasurement:
    """Outcome 0 for eigenvalue +1, outcome 1 for -1."""
    return ProjectiveMeasurement.from_observable(obs)


def product_measurement(observables: Sequence[Observable], refine: bool = False) -> ProjectiveMeasurement:
    """Measure ``O_1 ⊗ ... ⊗ O_N`` on the node subsystems.

    Coarse (default): two outcomes, the parity of the local sign bits.
    Refined: ``2^N`` outcomes ``b = Σ_k s_k 2^{N-1-k}`` over the sign bits
    ``s_k``; pair it with ``f(b) = parity(b)``.
    """
    splits = [o.projectors() for o in observables]
    n = len(splits)
    projs = []
    for b in range(1 << n):
        bits = [(b >> (n - 1 - k)) & 1 for k in range(n)]
        projs.append(tensor_all([splits[k][s] for k, s in enumerate(bits)]))
    if refine:
        return ProjectiveMeasurement(tuple(projs))
    even = sum(p for b, p in enumerate(projs) if bin(b).count("1") % 2 == 0)
    odd = sum(p for b, p in enumerate(projs) if bin(b).count("1") % 2 == 1)
    return ProjectiveMeasurement((even, odd))


def parity_table(n: int) -> tuple:
    return tuple(bin(b).count("1") % 2 for b in range(1 << n))


def _check_shape(qs: QuantumNetworkStrategy, sc: StarScenario):
    if qs.sources != sc.sources:
        raise ValidationError(f"strategy has {qs.sources} sources, scenario has {sc.sources}")
    for k, (obs, n_a) in enumerate(zip(qs.edge_observables, sc.edge_setting_counts)):
        if len(obs) != n_a:
            raise ValidationError(f"edge {k} has {len(obs)} observables, scenario needs {n_a}")
    if len(qs.node_measurements) != sc.node_input_count:
        raise ValidationError(
            f"{len(qs.node_measurements)} node measurements for {sc.node_input_count} node inputs"
        )
    for y, (meas, size) in enumerate(zip(qs.node_measurements, sc.node_alphabets)):
        if meas.outcome_count != size:
            raise ValidationError(f"node measurement {y} has {meas.outcome_count} outcomes, scenario declares {size}")


def interleave_node_operator(op: np.ndarray, edge_dims: Sequence[int], node_dims: Sequence[int]) -> np.ndarray:
    """Embed an operator on ``(node_1..node_N)`` into the interleaved global space."""
    n = len(edge_dims)
    grouped = np.kron(np.eye(int(np.prod(edge_dims))), op)
    dims = list(edge_dims) + list(node_dims)
    # interleaved factor j*2 is edge j, j*2+1 is node j; grouped lists edges first
    order = [f for k in range(n) for f in (k, n + k)]
    perm = subsystem_permutation(dims, order)
    return perm @ grouped @ perm.T


def global_state(qs: QuantumNetworkStrategy) -> np.ndarray:
    return tensor_all([rho.matrix for rho in qs.states])


def behavior_from_quantum(qs: QuantumNetworkStrategy, sc: StarScenario) -> NetworkBehavior:
    """Born-rule behavior ``Tr[(⊗ρ_k) (Π_{a_1|x_1} ⊗ ... ⊗ Π_{a_N|x_N} ⊗ Q_{b|y})]``.

    The trace is contracted source by source: each ``ρ_k`` is first reduced
    against the edge projectors, leaving an operator on ``node_k``; the node
    projectors then close the network.
    """
    _check_shape(qs, sc)
    n = sc.sources
    width = max(sc.node_alphabets)
    operands = []
    for k, (rho, obs) in enumerate(zip(qs.states, qs.edge_observables)):
        d_e, d_n = qs.edge_dims[k], qs.node_dims[k]
        proj = np.array([o.projectors() for o in obs])  # (x, a, e, e')
        r = rho.matrix.reshape(d_e, d_n, d_e, d_n)
        # R[x, a, n, n'] = Σ_{e,e'} ρ[(e,n),(e',n')] Π[x,a][e',e]
        reduced = np.einsum("enfm,xafe->xanm", r, proj)
        operands += [reduced, [k, n + k, 2 * n + k, 3 * n + k]]
    node_dim = int(np.prod(qs.node_dims))
    q = np.zeros((sc.node_input_count, width, node_dim, node_dim), dtype=complex)
    for y, meas in enumerate(qs.node_measurements):
        q[y, : meas.outcome_count] = meas.projectors
    q = q.reshape((sc.node_input_count, width) + qs.node_dims * 2)
    y_ax, b_ax = 4 * n, 4 * n + 1
    # node operator enters as Q[n', n]: row indices pair with ρ's column indices
    operands += [q, [y_ax, b_ax] + list(range(3 * n, 4 * n)) + list(range(2 * n, 3 * n))]
    out = list(range(n)) + [y_ax] + list(range(n, 2 * n)) + [b_ax]
    probs = np.einsum(*operands, out, optimize=True)
    if np.max(np.abs(probs.imag)) > ATOL:
        raise NumericFailure("Born-rule probabilities have a non-negligible imaginary part")
    probs = probs.real
    sums = probs.sum(axis=tuple(range(n + 1, 2 * n + 2)))
    if np.max(np.abs(sums - 1.0)) > ATOL:
        raise NumericFailure(f"Born-rule probabilities sum off by {np.max(np.abs(sums - 1.0)):.3g}")
    return NetworkBehavior(sc.edge_setting_counts, sc.node_alphabets, np.clip(probs, 0.0, None))


class NetworkSetup(NamedTuple):
    scenario: StarScenario
    strategy: QuantumNetworkStrategy


def tensorize(
    m: BellMatrix,
    state: DensityMatrix,
    alice: Sequence[Observable],
    bob: Sequence[Observable],
    sources: int,
) -> NetworkSetup:
    """Distribute ``N`` copies of a bipartite Bell strategy over a star network.

    Every edge plays Alice; node input ``y`` measures ``B_y^{⊗N}`` resolved into
    its ``2^N`` sign patterns, with ``f_y`` the parity so the correlator is the
    product of the local ``B_y`` outcomes.
    """
    if sources < 1:
        raise ValidationError("sources must be at least 1")
    row_terms(m, state, alice, bob)  # shape and dimension checks
    n = sources
    settings = [NodeSetting(y, parity_table(n)) for y in range(m.n_B)]
    scenario = StarScenario.homogeneous(m, n, settings, [1 << n] * m.n_B)
    nodes = [product_measurement([b] * n, refine=True) for b in bob]
    strategy = QuantumNetworkStrategy((state,) * n, (tuple(alice),) * n, tuple(nodes))
    return NetworkSetup(scenario, strategy)


TETRAHEDRON = np.array(
    [
        [1, 1, 1],
        [1, -1, -1],
        [-1, 1, -1],
        [-1, -1, 1],
    ]
) / np.sqrt(3)


def tetrahedron_observables() -> list[Observable]:
    return [bloch_to_observable(v) for v in TETRAHEDRON]


def pauli_observables() -> list[Observable]:
    return [Observable(p) for p in PAULIS]


def transposed_pauli_observables() -> list[Observable]:
    """``σ_1, σ_2^T = -σ_2, σ_3``: the partner settings that align with Paulis on ψ00."""
    return [Observable(p.T) for p in PAULIS]


def chsh_observables() -> tuple[list[Observable], list[Observable]]:
    """Settings reaching √2 on ψ00 for the ½(-1)^{xy} CHSH matrix."""
    alice = [Observable(SIGMA_Z), Observable(SIGMA_X)]
    bob = [Observable((SIGMA_Z + SIGMA_X) / np.sqrt(2)), Observable((SIGMA_Z - SIGMA_X) / np.sqrt(2))]
    return alice, bob


def elegant_bell_strategy() -> tuple[DensityMatrix, list[Observable], list[Observable]]:
    """ψ00 with tetrahedron settings for Alice; Bob measures transposed Paulis. Value 4√3."""
    return psi00(), tetrahedron_observables(), transposed_pauli_observables()


PRESET_NAMES = ("chsh_star", "elegant_swap_bsm", "elegant_swap_3settings", "elegant_swapped_roles")

BSM_F_TABLES = (
    (0, 0, 1, 1),  # b1
    (1, 0, 0, 1),  # b1 + b2 + 1
    (0, 1, 0, 1),  # b2
)


def _parse_preset_name(name: str, sources: int | None) -> tuple[str, int | None]:
    name = name.strip()
    if name.startswith("chsh_star"):
        rest = name[len("chsh_star"):]
        if rest:
            if not (rest.startswith("(") and rest.endswith(")")) or not rest[1:-1].strip().isdigit():
                raise ValidationError(f"cannot parse preset name {name!r}")
            sources = int(rest[1:-1])
        return "chsh_star", 2 if sources is None else sources
    return name, sources


def preset(name: str, sources: int | None = None) -> NetworkSetup:
    """Named scenario + quantum strategy pairs.

    ``chsh_star(N)`` (or ``chsh_star`` with ``sources``), ``elegant_swap_bsm``,
    ``elegant_swap_3settings``, ``elegant_swapped_roles``.
    """
    key, sources = _parse_preset_name(name, sources)
    rho = psi00()
    if key == "chsh_star":
        if sources < 1:
            raise ValidationError("chsh_star needs at least one source")
        settings, alphabets = binary_node_settings(2)
        scenario = StarScenario.homogeneous(chsh_matrix(), sources, settings, alphabets)
        alice, bob = chsh_observables()
        nodes = [product_measurement([b] * sources) for b in bob]
        return NetworkSetup(scenario, QuantumNetworkStrategy((rho,) * sources, (tuple(alice),) * sources, nodes))
    if sources not in (None, 2):
        raise ValidationError(f"preset {key!r} is defined for two sources only")
    m = elegant_matrix()
    tetra = tuple(tetrahedron_observables())
    paulis = pauli_observables()
    if key == "elegant_swap_bsm":
        settings = [NodeSetting(0, f) for f in BSM_F_TABLES]
        scenario = StarScenario.homogeneous(m, 2, settings, [4])
        return NetworkSetup(scenario, QuantumNetworkStrategy((rho, rho), (tetra, tetra), (bell_basis_2q(),)))
    if key == "elegant_swap_3settings":
        settings, alphabets = binary_node_settings(3)
        scenario = StarScenario.homogeneous(m, 2, settings, alphabets)
        nodes = [product_measurement([p, p]) for p in paulis]
        return NetworkSetup(scenario, QuantumNetworkStrategy((rho, rho), (tetra, tetra), nodes))
    if key == "elegant_swapped_roles":
        settings, alphabets = binary_node_settings(4)
        scenario = StarScenario.homogeneous(m.transpose(), 2, settings, alphabets)
        node_obs = [o.transpose() for o in tetra]
        nodes = [product_measurement([o, o]) for o in node_obs]
        edges = tuple(paulis)
        return NetworkSetup(scenario, QuantumNetworkStrategy((rho, rho), (edges, edges), nodes))
    raise ValidationError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")


def star_value(sc: StarScenario, qs: QuantumNetworkStrategy) -> float:
    return evaluate(behavior_from_quantum(qs, sc), sc).s_net


def critical_visibility(sc: StarScenario, qs: QuantumNetworkStrategy, tol: float = BISECTION_TOL) -> float | None:
    """Smallest common visibility ``v`` at which the star value reaches the bound.

    Every source state is replaced by ``werner(v, ρ_k)`` and ``v`` is located by
    bisection. Returns ``None`` when there is no violation at ``v = 1``.
    """
    bound = evaluate(behavior_from_quantum(qs, sc), sc).bound

    def excess(v):
        return star_value(sc, qs.with_visibilities([v] * qs.sources)) - bound

    if excess(1.0) <= tol:
        return None
    lo, hi = 0.0, 1.0
    if excess(lo) > 0:
        return 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def edge_bell_values(
    m: BellMatrix,
    states: Sequence[DensityMatrix],
    edge_observables: Sequence[Sequence[Observable]],
    node_factors: Sequence[Sequence[Observable]],
) -> np.ndarray:
    """``Σ_i |<Â_i B^k_i>_{ρ_k}|`` for each source ``k``, the Bell values of the independent tests.

    ``node_factors[k][i]`` is the node's local observable on source ``k`` for row ``i``.
    """
    return np.array(
        [np.abs(row_terms(m, rho, obs, fac)).sum() for rho, obs, fac in zip(states, edge_observables, node_factors)]
    )
