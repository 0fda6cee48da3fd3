"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also repeated in the terminal summary.
"""

import numpy as np

from builders import binary_scenario, parity_mixture_strategy, class_mixture_strategy, random_two_source_network
from oracles import born_two_sources
from starcorr.bell import BellMatrix, bell_value, chsh_matrix, elegant_matrix, local_bound, row_terms
from starcorr.nlocal import behavior_from_strategy, classical_max, reduce, sample_strategies, saturating_families
from starcorr.qmath import (
    PAULIS,
    Observable,
    psi00,
    random_density_matrix,
    random_pure_state,
    random_unit_vector,
    werner,
)
from starcorr.qnet import (
    QuantumNetworkStrategy,
    behavior_from_quantum,
    bloch_to_observable,
    critical_visibility,
    edge_bell_values,
    pauli_observables,
    preset,
    product_measurement,
    tensorize,
    tetrahedron_observables,
)
from starcorr.star import StarScenario, binary_node_settings, correlators, evaluate, product_bound_check

ROOT3 = np.sqrt(3)


def test_criterion_01_classical_bounds(criterion):
    chsh, elegant = local_bound(chsh_matrix()).bound, local_bound(elegant_matrix()).bound
    ok = abs(chsh - 1) < 1e-12 and abs(elegant - 6) < 1e-12
    assert criterion(1, "classical bounds C=1 (CHSH), C=6 (elegant)", ok, f"{chsh!r}, {elegant!r}")


def test_criterion_02_entanglement_swapping(criterion):
    sc, qs = preset("elegant_swap_bsm")
    beh = behavior_from_quantum(qs, sc)
    m = elegant_matrix().m
    corr_err = max(np.max(np.abs(correlators(beh, sc, i) - np.outer(m[i], m[i]) / 3)) for i in range(3))
    ev = evaluate(beh, sc)
    i_err = np.max(np.abs(ev.I - 16 / 3))
    s_err = abs(ev.s_net - 4 * ROOT3)
    ok = corr_err < 1e-9 and i_err < 1e-9 and s_err < 1e-9
    detail = f"corr err {corr_err:.1e}, I err {i_err:.1e}, s_net {ev.s_net:.12f}"
    assert criterion(2, "elegant BSM swapping: correlators, I=16/3, s_net=4√3", ok, detail)


def test_criterion_03_critical_visibility(criterion):
    values = {name: critical_visibility(*preset(name)) for name in ("elegant_swap_bsm", "elegant_swapped_roles")}
    ok = all(v is not None and abs(v - ROOT3 / 2) < 1e-7 for v in values.values())
    detail = ", ".join(f"{k}={v:.10f}" for k, v in values.items())
    assert criterion(3, "critical visibility √3/2", ok, detail)


def _aligned_bob(m, rho, alice, rng, optimize):
    """Bob settings with every row term non-negative; optionally the best direction per row."""
    if optimize:
        corr = np.array([[np.trace(rho.matrix @ np.kron(a.matrix, p)).real for p in PAULIS] for a in alice])
        directions = m.m @ corr
        bob = [bloch_to_observable(d / np.linalg.norm(d)) for d in directions]
    else:
        bob = [bloch_to_observable(random_unit_vector(rng)) for _ in range(m.n_B)]
    terms = row_terms(m, rho, alice, bob)
    return [Observable(-b.matrix) if t < 0 else b for b, t in zip(bob, terms)]


def test_criterion_04_tensorization(criterion):
    rng = np.random.default_rng(2024)
    worst, checked, violations, missed = 0.0, 0, 0, 0
    for trial in range(100):
        rho = random_pure_state(rng)
        m = chsh_matrix() if trial % 2 == 0 else elegant_matrix()
        alice = [bloch_to_observable(random_unit_vector(rng)) for _ in range(m.n_A)]
        bob = _aligned_bob(m, rho, alice, rng, optimize=trial % 4 < 2)
        value = bell_value(m, rho, alice, bob)
        for n in (2, 3):
            sc, qs = tensorize(m, rho, alice, bob, n)
            ev = evaluate(behavior_from_quantum(qs, sc), sc)
            worst = max(worst, abs(ev.s_net - value))
            checked += 1
            if value > local_bound(m).bound + 1e-6:
                violations += 1
                missed += not ev.violated
    ok = worst < 1e-9 and missed == 0 and violations > 0
    detail = f"{checked} checks, max |s_net - S_bs| {worst:.1e}, {violations} violating cases, {missed} missed"
    assert criterion(4, "tensorization preserves the Bell value", ok, detail)


def test_criterion_05_nlocal_soundness(criterion):
    cases = [("CHSH N=2", chsh_matrix(), 2), ("CHSH N=3", chsh_matrix(), 3), ("elegant N=2", elegant_matrix(), 2)]
    excess, attained = [], []
    for seed, (_, m, n) in enumerate(cases):
        sc = binary_scenario(m, n)
        bound = local_bound(m).bound
        best = max(evaluate(behavior_from_strategy(st, sc), sc).s_net for st in sample_strategies(sc, 10_000, seed))
        excess.append(best - bound)
        res = classical_max(sc)
        witness = evaluate(behavior_from_strategy(res.strategy, sc), sc).s_net
        attained.append(res.value == bound and abs(witness - bound) < 1e-9)
    ok = max(excess) <= 1e-9 and all(attained)
    detail = ", ".join(f"{c[0]}: max excess {e:.1e}" for c, e in zip(cases, excess))
    assert criterion(5, "N-local samples respect the bound; classical_max attains it", ok, detail)


def test_criterion_06_saturation_converse(criterion):
    sc = binary_scenario(chsh_matrix(), 2)
    cls = next(c for c in saturating_families(chsh_matrix(), 2) if c.sign_pattern == (1, 1))
    first = [int(np.argmax(np.abs(v))) == 0 for v in cls.vectors]
    worst = 0.0
    for p in np.linspace(0, 1, 11):
        weights = [p if f else 1 - p for f in first]
        point = cls.point(weights)
        ev = evaluate(behavior_from_strategy(cls.reduced_strategy(weights).to_strategy(sc), sc), sc)
        worst = max(
            worst,
            np.max(np.abs(point - [p**2, (1 - p) ** 2])),
            np.max(np.abs(ev.I - point)),
            abs(np.sqrt(abs(ev.I[0])) + np.sqrt(abs(ev.I[1])) - 1),
        )
    ok = worst < 1e-9
    assert criterion(6, "CHSH boundary I=(p², (1-p)²) realized by constructed strategies", ok, f"max err {worst:.1e}")


def test_criterion_07_reduction(criterion):
    worst, deterministic, count = 0.0, True, 0

    def check(sc, st):
        nonlocal worst, deterministic, count
        before = evaluate(behavior_from_strategy(st, sc), sc).I
        reduced = reduce(st, sc)
        rebuilt = reduced.to_strategy(sc)
        after = evaluate(behavior_from_strategy(rebuilt, sc), sc).I
        worst = max(worst, np.max(np.abs(after - before)))
        deterministic &= all(np.unique(t).size == 1 for t in rebuilt.node_table)
        count += 1

    for r in (0.25, 0.5, 0.75):
        for n in (2, 3):
            check(*parity_mixture_strategy(r, n))
    rng = np.random.default_rng(77)
    for j in range(20):
        m = chsh_matrix() if j % 2 == 0 else elegant_matrix()
        sc, st, _ = class_mixture_strategy(rng, m, 2 + j % 2)
        check(sc, st)
    ok = worst < 1e-9 and deterministic
    assert criterion(7, "reduction keeps I and yields a deterministic node", ok, f"{count} strategies, max err {worst:.1e}")


def _random_product_case(rng):
    n_b, n_a = int(rng.integers(1, 4)), int(rng.integers(1, 5))
    m = BellMatrix(rng.normal(size=(n_b, n_a)))
    states = [random_density_matrix(rng) for _ in range(2)]
    edges = [[bloch_to_observable(random_unit_vector(rng)) for _ in range(n_a)] for _ in range(2)]
    factors = [[bloch_to_observable(random_unit_vector(rng)) for _ in range(n_b)] for _ in range(2)]
    sc = StarScenario.homogeneous(m, 2, *binary_node_settings(n_b))
    nodes = [product_measurement([factors[0][i], factors[1][i]]) for i in range(n_b)]
    qs = QuantumNetworkStrategy(tuple(states), tuple(map(tuple, edges)), tuple(nodes))
    s_net = evaluate(behavior_from_quantum(qs, sc), sc).s_net
    return s_net, edge_bell_values(m, states, edges, factors)


def test_criterion_08_product_bound(criterion):
    rng = np.random.default_rng(13)
    failures, slack = 0, np.inf
    for _ in range(1000):
        s_net, values = _random_product_case(rng)
        pb = product_bound_check(values, s_net)
        failures += not pb.holds
        slack = min(slack, pb.geometric_mean - s_net)
    v1, v2 = 0.95, 0.8
    states = [werner(v1, psi00()), werner(v2, psi00())]
    sc, qs = preset("elegant_swap_3settings")
    qs = qs.with_states(states)
    s_net = evaluate(behavior_from_quantum(qs, sc), sc).s_net
    tetra, paulis = tetrahedron_observables(), pauli_observables()
    gm = product_bound_check(edge_bell_values(elegant_matrix(), states, [tetra, tetra], [paulis, paulis]), s_net)
    equality = abs(gm.geometric_mean - s_net) < 1e-9 and abs(s_net - 4 * ROOT3 * np.sqrt(v1 * v2)) < 1e-9
    ok = failures == 0 and equality
    detail = f"1000 cases, min slack {slack:.1e}, equality gap {abs(gm.geometric_mean - s_net):.1e}"
    assert criterion(8, "product node measurements never beat the geometric mean", ok, detail)


def _root_sum_sides(x):
    """x has shape (batch, n_B, N); returns Σ_i (Π_k x_ik)^{1/N} and Π_k (Σ_i x_ik)^{1/N}."""
    n = x.shape[2]
    left = (np.prod(x, axis=2) ** (1.0 / n)).sum(axis=1)
    right = np.prod(x.sum(axis=1) ** (1.0 / n), axis=1)
    return left, right


def test_criterion_09_root_sum_inequality(criterion):
    rng = np.random.default_rng(99)
    shapes = [(nb, n) for nb in range(1, 6) for n in range(1, 5)]
    per_shape = 100_000 // len(shapes)
    worst_gap, worst_equal = -np.inf, 0.0
    for nb, n in shapes:
        x = rng.exponential(size=(per_shape, nb, n)) * (rng.random((per_shape, nb, n)) > 0.2)
        left, right = _root_sum_sides(x)
        worst_gap = max(worst_gap, np.max(left - right))
        col = rng.exponential(size=(per_shape // 10, nb, 1))
        left, right = _root_sum_sides(np.repeat(col, n, axis=2))
        worst_equal = max(worst_equal, np.max(np.abs(left - right)))
    ok = worst_gap <= 1e-9 and worst_equal < 1e-9
    detail = f"{per_shape * len(shapes)} instances, max excess {worst_gap:.1e}, equal-column gap {worst_equal:.1e}"
    assert criterion(9, "root-sum inequality on non-negative arrays", ok, detail)


def test_criterion_10_born_rule_oracle(criterion):
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(50):
        sc, qs = random_two_source_network(rng)
        table = behavior_from_quantum(qs, sc).table
        edge = [[o.projectors() for o in obs] for obs in qs.edge_observables]
        nodes = [meas.projectors for meas in qs.node_measurements]
        oracle = born_two_sources(qs.states[0].matrix, qs.states[1].matrix, *edge, nodes, table.shape[-1])
        worst = max(worst, np.max(np.abs(table - oracle)))
    ok = worst < 1e-10
    assert criterion(10, "Born rule matches the dense 16x16 oracle", ok, f"50 strategies, max err {worst:.1e}")
