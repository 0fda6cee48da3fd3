"""Slow, independent reference computations used to cross-check the package."""

import itertools

import numpy as np


def kron_by_index(a, b):
    """Kronecker product written out entry by entry."""
    a, b = np.asarray(a), np.asarray(b)
    out = np.zeros((a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]), dtype=complex)
    for i, j, k, l in itertools.product(range(a.shape[0]), range(a.shape[1]), range(b.shape[0]), range(b.shape[1])):
        out[i * b.shape[0] + k, j * b.shape[1] + l] = a[i, j] * b[k, l]
    return out


def born_two_sources(rho1, rho2, edge1, edge2, node_measurements, width):
    """Direct global-density-matrix Born rule for two qubit-qubit sources.

    The global state is built on (e1, n1, e2, n2) by index arithmetic and every
    global operator E1 ⊗ E2 ⊗ Q is assembled entry by entry in the same layout,
    with Q written on (n1, n2). Returns the table (x1, x2, y, a1, a2, b).
    """
    r1, r2 = rho1.reshape(2, 2, 2, 2), rho2.reshape(2, 2, 2, 2)
    # ρ[(e1 n1 e2 n2), (e1' n1' e2' n2')] = ρ1[(e1 n1),(e1' n1')] ρ2[(e2 n2),(e2' n2')]
    rho = np.einsum("abcd,efgh->abefcdgh", r1, r2).reshape(16, 16)
    n_x1, n_x2 = len(edge1), len(edge2)
    table = np.zeros((n_x1, n_x2, len(node_measurements), 2, 2, width))
    digits = list(itertools.product(range(2), repeat=4))
    for x1, x2, a1, a2 in itertools.product(range(n_x1), range(n_x2), range(2), range(2)):
        p1, p2 = edge1[x1][a1], edge2[x2][a2]
        for y, projs in enumerate(node_measurements):
            for b, q in enumerate(projs):
                op = np.zeros((16, 16), dtype=complex)
                for r, (e1, n1, e2, n2) in enumerate(digits):
                    for c, (f1, m1, f2, m2) in enumerate(digits):
                        op[r, c] = p1[e1, f1] * p2[e2, f2] * q[2 * n1 + n2, 2 * m1 + m2]
                table[x1, x2, y, a1, a2, b] = np.trace(rho @ op).real
    return table


def correlator_by_sum(table, sources, y, f, xs):
    """Σ over outcomes of (-1)^{a_1+...+a_N+f(b)} P(a⃗ b | x⃗ y), term by term."""
    block = table[tuple(xs) + (y,)]
    total = 0.0
    for a_s in itertools.product(range(2), repeat=sources):
        for b, fb in enumerate(f):
            total += (-1) ** (sum(a_s) + fb) * block[a_s + (b,)]
    return total


def behavior_by_hidden_values(weights, edge_tables, node_table, width):
    """Accumulate P(a⃗ b | x⃗ y) one hidden-variable tuple at a time."""
    n = len(weights)
    counts = [t.shape[1] for t in edge_tables]
    table = np.zeros(tuple(counts) + (len(node_table),) + (2,) * n + (width,))
    for lams in itertools.product(*[range(len(w)) for w in weights]):
        q = np.prod([w[l] for w, l in zip(weights, lams)])
        for xs in itertools.product(*[range(c) for c in counts]):
            a_s = tuple(int(edge_tables[k][l, x] == -1) for k, (l, x) in enumerate(zip(lams, xs)))
            for y, t in enumerate(node_table):
                table[xs + (y,) + a_s + (int(t[lams]),)] += q
    return table
