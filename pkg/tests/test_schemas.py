import json

import numpy as np
import pytest

from builders import parity_mixture_strategy
from starcorr import schemas
from starcorr.errors import ValidationError
from starcorr.qmath import psi00, werner
from starcorr.qnet import behavior_from_quantum, elegant_bell_strategy, preset


def _roundtrip(dump, load, obj):
    return load(json.loads(json.dumps(dump(obj))))


@pytest.mark.parametrize("name", ["elegant_swap_bsm", "elegant_swap_3settings", "elegant_swapped_roles", "chsh_star(3)"])
def test_preset_roundtrip_preserves_behavior(name):
    sc, qs = preset(name)
    sc2 = _roundtrip(schemas.dump_scenario, schemas.load_scenario, sc)
    qs2 = _roundtrip(schemas.dump_quantum, schemas.load_quantum, qs)
    assert np.array_equal(behavior_from_quantum(qs, sc).table, behavior_from_quantum(qs2, sc2).table)


def test_strategy_roundtrip():
    sc, st = parity_mixture_strategy(0.3, 2)
    st2 = _roundtrip(schemas.dump_strategy, schemas.load_strategy, st)
    assert all(np.array_equal(a, b) for a, b in zip(st.edge_tables, st2.edge_tables))
    assert all(np.array_equal(a, b) for a, b in zip(st.node_table, st2.node_table))


def test_state_encodings():
    assert schemas.dump_state(psi00()) == {"preset": "psi00"}
    assert schemas.dump_state(werner(0.5, psi00())) == {"werner": {"v": 0.5}}
    assert np.allclose(schemas.load_state({"werner": {"v": 0.25}}).matrix, werner(0.25, psi00()).matrix)


def test_bell_strategy_roundtrip():
    rho, alice, bob = elegant_bell_strategy()
    doc = json.loads(json.dumps(schemas.dump_bell_strategy(rho, alice, bob)))
    rho2, alice2, bob2 = schemas.load_bell_strategy(doc)
    assert all(np.array_equal(a.matrix, b.matrix) for a, b in zip(alice + bob, alice2 + bob2))


@pytest.mark.parametrize(
    "doc",
    [
        {"rows": 2, "cols": 2},
        {"rows": 2, "cols": 2, "entries": [[1, 2, 3]]},
        {"rows": 1.5, "cols": 2, "entries": [[1, 2]]},
        {"rows": 1, "cols": 2, "entries": [["a", 2]]},
    ],
)
def test_bad_matrices(doc):
    with pytest.raises(ValidationError):
        schemas.load_matrix(doc)


@pytest.mark.parametrize(
    "doc",
    [{"preset": "ghz"}, {"werner": {"v": "high"}}, {"werner": {"v": 2}}, {"matrix": [[1, 0], [0, 0], [0, 0]]}, []],
)
def test_bad_states(doc):
    with pytest.raises(ValidationError):
        schemas.load_state(doc)


def test_bad_observables():
    for doc in ({"pauli": 4}, {"bloch": [2, 0, 0]}, {"spin": 1}):
        with pytest.raises(ValidationError):
            schemas.load_observable(doc)
