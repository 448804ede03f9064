from __future__ import annotations

import itertools

import numpy as np
import pytest

from conftest import EX3_PARTITION_1, bell_group, ex2_group, ex3_group, ref_matrix, ref_site
from stabtel.dense import projector
from stabtel.errors import NoDecompositionError
from stabtel.pauli import PauliOperator, commutation_exponent, parse_pauli
from stabtel.protocol import (
    CorrectionRule,
    conjugation_residuals,
    correction_unitary,
    joint_measurement,
    sender_projector,
    synthesize_protocol,
    synthesize_receiver_unitary,
)
from stabtel.stabilizer import build_group


def test_fourier_example():
    # zbar = X, xbar = Z^-1 satisfy the Z/X commutation, so U is a Fourier transform
    d = 3
    U = synthesize_receiver_unitary([parse_pauli("X", d)], [parse_pauli("Z^-1", d)], d, 1)
    assert np.abs(U @ U.conj().T - np.eye(d)).max() < 1e-10
    assert np.abs(U @ ref_site(d, 1, 0) @ U.conj().T - ref_site(d, 0, 1)).max() < 1e-10
    assert np.abs(U @ ref_site(d, 0, d - 1) @ U.conj().T - ref_site(d, 1, 0)).max() < 1e-10


def test_two_qudit_witness():
    d = 2
    zbar = [parse_pauli("Z Z", d), parse_pauli("X X", d)]
    xbar = [parse_pauli("X I", d)]
    U = synthesize_receiver_unitary(zbar, xbar, d, 2)
    assert np.abs(U @ U.conj().T - np.eye(4)).max() < 1e-10
    assert max(conjugation_residuals(U, zbar, xbar)) < 1e-10


def test_invalid_witness_is_refused():
    with pytest.raises(ValueError):
        synthesize_receiver_unitary([parse_pauli("Z", 3)], [parse_pauli("X^2", 3)], 3, 1)
    with pytest.raises(ValueError):
        synthesize_receiver_unitary([parse_pauli("Z I", 2), parse_pauli("X I", 2)], [], 2, 2)


@pytest.mark.parametrize("d", [2, 3, 5])
@pytest.mark.parametrize("x", [(0, 0), (1, 0), (0, 1), (1, 1)])
def test_correction_unitary_matches_definition(d, x):
    V = correction_unitary(x, 1, d)
    expected = ref_site(d, 0, (-x[1]) % d) @ ref_site(d, x[0] % d, 0)
    assert np.abs(ref_matrix(V) - expected).max() < 1e-12


def test_correction_unitary_two_destinations():
    d = 3
    x = (1, 2, 2, 1)
    V = correction_unitary(x, 2, d)
    site = lambda a, b: ref_site(d, 0, (-b) % d) @ ref_site(d, a, 0)
    assert np.abs(ref_matrix(V) - np.kron(site(1, 2), site(2, 1))).max() < 1e-12
    with pytest.raises(ValueError):
        correction_unitary((1, 2, 3), 2, d)


def test_bell_protocol_shape():
    spec = synthesize_protocol(bell_group(3), [[1], [2]])
    assert spec.capacities == (1,)
    assert spec.b == 1
    assert spec.outcome_count == 9
    assert spec.destinations == ((2,),)
    assert spec.corrections == (CorrectionRule(2, 1, 1, 2, 2),)


@pytest.mark.parametrize(
    "factory,parts",
    [(lambda: bell_group(3), [[1], [2]]), (ex2_group, [[1, 2], [3, 4, 5]]), (ex3_group, EX3_PARTITION_1)],
)
def test_sender_measurements_are_complete_commuting_projectors(factory, parts):
    spec = synthesize_protocol(factory(), parts)
    d = spec.d
    for i, ops in enumerate(spec.measurements):
        for a, b in itertools.combinations(ops, 2):
            assert commutation_exponent(a, b) == 0
        nq = len(spec.senders[i]) + spec.capacities[i]
        total = np.zeros((d**nq, d**nq), dtype=complex)
        for x in itertools.product(range(d), repeat=len(ops)):
            P = sender_projector(spec, i, x)
            assert np.abs(P @ P - P).max() < 1e-12
            assert np.abs(P - P.conj().T).max() < 1e-12
            total += P
        assert np.abs(total - np.eye(d**nq)).max() < 1e-12


def test_example3_first_sender_measures_expected_operators():
    spec = synthesize_protocol(ex3_group(), EX3_PARTITION_1)
    assert spec.capacities == (1, 2)
    assert [str(h) for h in spec.measurements[0]] == ["X Y Z", "X Z X"]


def test_joint_projector_factorizes_for_two_bell_pairs():
    d = 3
    S = build_group([parse_pauli(s, d) for s in ["Z^-1 I Z I", "X I X I", "I Z^-1 I Z", "I X I X"]])
    spec = synthesize_protocol(S, [[1], [2], [3, 4]])
    assert spec.capacities == (1, 1)
    joint = joint_measurement(spec)
    perm = [0, 2, 1, 3]  # joint order: site1, site2, msg1, msg2 -> sender-major
    for x in itertools.product(range(d), repeat=4):
        P = projector(list(joint), list(x))
        per = np.kron(sender_projector(spec, 0, x[:2]), sender_projector(spec, 1, x[2:]))
        t = per.reshape([d] * 8).transpose(perm + [4 + p for p in perm]).reshape(d**4, d**4)
        assert np.abs(P - t).max() < 1e-12


def test_zero_capacity_is_refused():
    S = build_group([parse_pauli("Z I", 2), parse_pauli("I Z", 2)])
    with pytest.raises(NoDecompositionError):
        synthesize_protocol(S, [[1], [2]])


def test_unitary_order_must_be_known():
    with pytest.raises(ValueError):
        synthesize_protocol(bell_group(2), [[1], [2]], unitary_order="sideways")
