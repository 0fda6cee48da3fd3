"""JSON encodings for matrices, scenarios, classical and quantum strategies.

Matrix::

    {"rows": 3, "cols": 4, "entries": [[1, 1, -1, -1], ...]}

Scenario::

    {"sources": 2, "edge_matrices": [matrix, ...],
     "node": {"alphabets": {"0": 4}, "settings": [{"y": 0, "f": [0, 0, 1, 1]}, ...]}}

Classical strategy::

    {"supports": [{"weights": [...]}, ...], "edges": [[[±1 per x] per λ], ...],
     "node": {"0": nested list over (λ_1, ..., λ_N) of outcomes}}

Quantum strategy::

    {"sources": 2, "states": [state, ...], "edges": [[observable, ...], ...],
     "node": [measurement, ...]}

States are ``{"preset": "psi00"}``, ``{"werner": {"v": v}}`` (optionally with a
``"base"`` state) or ``{"matrix": [[re, im], ...]}`` in row-major order.
Observables are ``{"bloch": [x, y, z]}``, ``{"pauli": 1|2|3}`` or
``{"matrix": ...}``. Node measurements are ``{"bsm2": true}``,
``{"product": [observable, ...], "refine": bool}``, ``{"projectors": [matrix, ...]}``
or a single observable (measured as a binary measurement).
"""

from __future__ import annotations

import math
from typing import Any

import numpy as np

from .bell import BellMatrix
from .errors import ValidationError
from .nlocal import NLocalStrategy, ReducedStrategy, SignClass
from .qmath import (
    PAULIS,
    DensityMatrix,
    Observable,
    ProjectiveMeasurement,
    bell_basis_2q,
    bloch_to_observable,
    psi00,
    werner,
)
from .qnet import QuantumNetworkStrategy, binary_measurement, product_measurement
from .star import NodeSetting, StarScenario


def _require(doc, key: str, where: str):
    if not isinstance(doc, dict) or key not in doc:
        raise ValidationError(f"{where}: missing key {key!r}")
    return doc[key]


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
        raise ValidationError(f"{where}: expected an integer, got {value!r}")
    return int(value)


# matrices

def load_matrix(doc) -> BellMatrix:
    rows = _int(_require(doc, "rows", "matrix"), "matrix.rows")
    cols = _int(_require(doc, "cols", "matrix"), "matrix.cols")
    entries = _require(doc, "entries", "matrix")
    try:
        arr = np.array(entries, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError("matrix.entries must be real numbers") from None
    if arr.ndim == 1 and arr.size == rows * cols:
        arr = arr.reshape(rows, cols)
    if arr.shape != (rows, cols):
        raise ValidationError(f"matrix.entries has shape {arr.shape}, declared {rows}x{cols}")
    return BellMatrix(arr)


def dump_matrix(m: BellMatrix) -> dict:
    return {"rows": m.n_B, "cols": m.n_A, "entries": m.m.tolist()}


# scenarios

def load_scenario(doc) -> StarScenario:
    sources = _int(_require(doc, "sources", "scenario"), "scenario.sources")
    mats = [load_matrix(m) for m in _require(doc, "edge_matrices", "scenario")]
    if len(mats) == 1 and sources > 1:
        mats = mats * sources
    if len(mats) != sources:
        raise ValidationError(f"scenario declares {sources} sources but lists {len(mats)} edge matrices")
    node = _require(doc, "node", "scenario")
    alphabets = _require(node, "alphabets", "scenario.node")
    if not isinstance(alphabets, dict):
        raise ValidationError("scenario.node.alphabets must map node inputs to sizes")
    try:
        alphabets = {int(k): _int(v, "alphabet size") for k, v in alphabets.items()}
    except ValueError:
        raise ValidationError("scenario.node.alphabets keys must be integers") from None
    settings = [
        NodeSetting(_int(_require(s, "y", "node setting"), "node setting y"), tuple(_require(s, "f", "node setting")))
        for s in _require(node, "settings", "scenario.node")
    ]
    return StarScenario(mats, settings, alphabets)


def dump_scenario(sc: StarScenario) -> dict:
    mats = [dump_matrix(m) for m in sc.edge_matrices]
    return {
        "sources": sc.sources,
        "edge_matrices": mats,
        "node": {
            "alphabets": {str(y): a for y, a in enumerate(sc.node_alphabets)},
            "settings": [{"y": s.y, "f": list(s.f)} for s in sc.node_settings],
        },
    }


# classical strategies

def load_strategy(doc) -> NLocalStrategy:
    supports = _require(doc, "supports", "strategy")
    weights = [_require(s, "weights", "strategy.supports") for s in supports]
    edges = _require(doc, "edges", "strategy")
    node = _require(doc, "node", "strategy")
    if not isinstance(node, dict):
        raise ValidationError("strategy.node must map node inputs to outcome tables")
    try:
        keys = sorted(int(k) for k in node)
    except ValueError:
        raise ValidationError("strategy.node keys must be integers") from None
    if keys != list(range(len(keys))):
        raise ValidationError(f"strategy.node inputs must be numbered 0..n-1, got {keys}")
    lookup = {int(k): v for k, v in node.items()}
    return NLocalStrategy(weights, edges, [np.array(lookup[y]) for y in keys])


def dump_strategy(st: NLocalStrategy) -> dict:
    return {
        "supports": [{"weights": w.tolist()} for w in st.weights],
        "edges": [t.astype(int).tolist() for t in st.edge_tables],
        "node": {str(y): t.tolist() for y, t in enumerate(st.node_table)},
    }


def dump_reduced(r: ReducedStrategy) -> dict:
    return {
        "edge": r.shared_edge_table.astype(int).tolist(),
        "weights": r.shared_weights.tolist(),
        "node_signs": list(r.node_signs),
    }


def dump_sign_class(c: SignClass) -> dict:
    return {
        "sign_pattern": list(c.sign_pattern),
        "members": [{"X": list(x.values), "Y": y.tolist()} for x, y in c.members],
    }


# quantum objects

def _complex_pairs(doc, where: str) -> np.ndarray:
    try:
        arr = np.array(doc, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(f"{where}: expected a list of [re, im] pairs") from None
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValidationError(f"{where}: expected a list of [re, im] pairs")
    dim = math.isqrt(arr.shape[0])
    if dim * dim != arr.shape[0]:
        raise ValidationError(f"{where}: {arr.shape[0]} entries do not form a square matrix")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(dim, dim)


def _pairs(m: np.ndarray) -> list:
    flat = np.asarray(m).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def load_state(doc) -> DensityMatrix:
    if not isinstance(doc, dict):
        raise ValidationError(f"cannot parse state {doc!r}")
    if "preset" in doc:
        if doc["preset"] != "psi00":
            raise ValidationError(f"unknown state preset {doc['preset']!r}")
        return psi00()
    if "werner" in doc:
        params = doc["werner"]
        v = _require(params, "v", "werner state")
        base = load_state(params["base"]) if "base" in params else psi00()
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValidationError(f"werner state: v must be a number, got {v!r}")
        return werner(float(v), base)
    if "matrix" in doc:
        return DensityMatrix(_complex_pairs(doc["matrix"], "state matrix"))
    raise ValidationError(f"cannot parse state {doc!r}")


def dump_state(rho: DensityMatrix) -> dict:
    if rho.dim == 4:
        target = psi00().matrix
        # v from the overlap with ψ00, then confirm the whole matrix matches
        v = (np.real(np.trace(rho.matrix @ target)) - 0.25) / 0.75
        # prefer the short decimal when it reproduces the matrix equally well
        v = round(v, 12) if abs(round(v, 12) - v) < 1e-14 else v
        if 0 <= v <= 1 and np.max(np.abs(werner(v, psi00()).matrix - rho.matrix)) < 1e-14:
            return {"preset": "psi00"} if v == 1 else {"werner": {"v": float(v)}}
    return {"matrix": _pairs(rho.matrix)}


def load_observable(doc) -> Observable:
    if not isinstance(doc, dict):
        raise ValidationError(f"cannot parse observable {doc!r}")
    if "bloch" in doc:
        return bloch_to_observable(doc["bloch"])
    if "pauli" in doc:
        k = _int(doc["pauli"], "pauli index")
        if k not in (1, 2, 3):
            raise ValidationError(f"pauli index must be 1, 2 or 3, got {k}")
        return Observable(PAULIS[k - 1])
    if "matrix" in doc:
        return Observable(_complex_pairs(doc["matrix"], "observable matrix"))
    raise ValidationError(f"cannot parse observable {doc!r}")


def dump_observable(o: Observable) -> dict:
    if o.dim == 2 and abs(np.trace(o.matrix)) < 1e-15:
        v = [float(np.real(np.trace(o.matrix @ p)) / 2) for p in PAULIS]
        if np.max(np.abs(bloch_to_observable(v).matrix - o.matrix)) == 0:
            return {"bloch": v}
    return {"matrix": _pairs(o.matrix)}


def load_measurement(doc) -> ProjectiveMeasurement:
    if not isinstance(doc, dict):
        raise ValidationError(f"cannot parse measurement {doc!r}")
    if doc.get("bsm2"):
        return bell_basis_2q()
    if "product" in doc:
        obs = [load_observable(o) for o in doc["product"]]
        if not obs:
            raise ValidationError("product measurement needs at least one factor")
        return product_measurement(obs, refine=bool(doc.get("refine", False)))
    if "projectors" in doc:
        return ProjectiveMeasurement(tuple(_complex_pairs(p, "projector") for p in doc["projectors"]))
    return binary_measurement(load_observable(doc))


def dump_measurement(meas: ProjectiveMeasurement) -> dict:
    if meas.dim == 4 and meas.outcome_count == 4:
        ref = bell_basis_2q()
        if all(np.max(np.abs(p - q)) < 1e-14 for p, q in zip(meas.projectors, ref.projectors)):
            return {"bsm2": True}
    return {"projectors": [_pairs(p) for p in meas.projectors]}


def load_quantum(doc) -> QuantumNetworkStrategy:
    states = [load_state(s) for s in _require(doc, "states", "quantum strategy")]
    edges = [[load_observable(o) for o in obs] for obs in _require(doc, "edges", "quantum strategy")]
    node = [load_measurement(m) for m in _require(doc, "node", "quantum strategy")]
    if "sources" in doc:
        sources = _int(doc["sources"], "quantum.sources")
        if len(states) == 1 and sources > 1:
            states = states * sources
        if len(edges) == 1 and sources > 1:
            edges = edges * sources
        if len(states) != sources or len(edges) != sources:
            raise ValidationError(f"quantum strategy declares {sources} sources but lists {len(states)} states")
    return QuantumNetworkStrategy(tuple(states), tuple(tuple(e) for e in edges), tuple(node))


def dump_quantum(qs: QuantumNetworkStrategy) -> dict:
    return {
        "sources": qs.sources,
        "states": [dump_state(r) for r in qs.states],
        "edges": [[dump_observable(o) for o in obs] for obs in qs.edge_observables],
        "node": [dump_measurement(m) for m in qs.node_measurements],
    }


def load_bell_strategy(doc) -> tuple[DensityMatrix, list[Observable], list[Observable]]:
    """``{"state": state, "alice": [observable, ...], "bob": [observable, ...]}``."""
    state = load_state(_require(doc, "state", "bell strategy"))
    alice = [load_observable(o) for o in _require(doc, "alice", "bell strategy")]
    bob = [load_observable(o) for o in _require(doc, "bob", "bell strategy")]
    return state, alice, bob


def dump_bell_strategy(state: DensityMatrix, alice, bob) -> dict[str, Any]:
    return {
        "state": dump_state(state),
        "alice": [dump_observable(o) for o in alice],
        "bob": [dump_observable(o) for o in bob],
    }
