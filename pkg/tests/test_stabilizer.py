from __future__ import annotations

import itertools

import numpy as np
import pytest

from conftest import (
    EX3_PARTITION_1,
    EX3_PARTITION_2,
    bell_group,
    ex2_group,
    ex3_group,
    ex3_transformed_group,
    random_pauli,
    ref_matrix,
)
from stabtel.dense import rho_S, stabilizer_projector
from stabtel.errors import GroupValidationError, PartitionError
from stabtel.pauli import PauliOperator, multiply, parse_pauli, power, restrict
from stabtel.problem_io import load_demo
from stabtel.stabilizer import (
    CanonicalPattern,
    PatternWitness,
    build_group,
    certify_decomposition,
    certify_pattern,
    find_bipartite_decomposition,
    is_member,
    normalize_partition,
    restrict_group,
    search_decomposition,
    verify_decomposition,
)


def all_elements(S):
    """Every element of S, phase included, by brute-force enumeration."""
    out = {}
    orders = [2 * S.d] * S.k  # generous: exponents wrap anyway
    for exps in itertools.product(*(range(o) for o in orders)):
        g = PauliOperator.identity(S.d, S.n)
        for gen, e in zip(S.generators, exps):
            g = multiply(g, power(gen, e))
        out[g] = exps
    return out


# -- validation -----------------------------------------------------------------------


def test_valid_groups_build():
    assert bell_group(2).k == 2
    assert ex2_group().k == 5
    S = ex3_group()
    assert (S.k, S.order(), S.projector_rank()) == (7, 128, 2)


def test_dimension_mismatch():
    with pytest.raises(GroupValidationError) as e:
        build_group([parse_pauli("X X", 2), parse_pauli("Z Z Z", 2)])
    assert e.value.kind == "dimension" and e.value.indices == (2,)


def test_not_in_g_prime():
    with pytest.raises(GroupValidationError) as e:
        build_group([parse_pauli("XZ", 2)])
    assert e.value.kind == "not_in_G_prime" and e.value.indices == (1,)
    with pytest.raises(GroupValidationError) as e:
        build_group([parse_pauli("- I", 2)])
    assert e.value.kind == "not_in_G_prime"


def test_noncommuting_reports_pair_and_exponent():
    with pytest.raises(GroupValidationError) as e:
        build_group([parse_pauli("Z I", 3), parse_pauli("I X", 3), parse_pauli("X I", 3)])
    assert e.value.kind == "noncommuting"
    assert e.value.indices == (1, 3)
    assert e.value.exponent == 1


def test_dependent_generator():
    with pytest.raises(GroupValidationError) as e:
        build_group([parse_pauli("X X", 3), parse_pauli("Z^2 Z", 3), parse_pauli("X^2 X^2", 3)])
    assert e.value.kind == "dependent" and e.value.indices == (3,)
    with pytest.raises(GroupValidationError) as e:
        build_group([parse_pauli("X X", 2), parse_pauli("I I", 2)])
    assert e.value.kind == "dependent"


def test_product_equal_to_minus_identity_is_rejected():
    # XX, ZZ, -YY each have eigenvalue 1, commute, but XX.ZZ.(-YY) = +-1 ... pick the bad sign
    XX, ZZ = parse_pauli("X X", 2), parse_pauli("Z Z", 2)
    prod = multiply(XX, ZZ)  # = -YY
    bad = prod.with_phase(prod.phase + 2)  # = +YY, so XX.ZZ.YY = -I
    with pytest.raises(GroupValidationError) as e:
        build_group([XX, ZZ, bad])
    assert e.value.kind == "scalar"


def test_composite_vector_orders_count_in_rank():
    S = build_group([parse_pauli("X^2 X^2", 4), parse_pauli("Z^2 Z^2", 4)])
    assert S.order() == 4
    assert S.projector_rank() == 4
    assert abs(np.trace(stabilizer_projector(S.generators, 4, 2)).real - 4) < 1e-10


@pytest.mark.parametrize("factory", [lambda: bell_group(3), ex2_group, ex3_group])
def test_rank_matches_dense_trace(factory):
    S = factory()
    assert abs(np.trace(stabilizer_projector(S.generators, S.d, S.n)).real - S.projector_rank()) < 1e-9
    rho = rho_S(S)
    for g in S.generators:
        G = ref_matrix(g)
        assert np.abs(G @ rho - rho).max() < 1e-10


# -- membership ---------------------------------------------------------------------


@pytest.mark.parametrize("S", [bell_group(3), build_group([parse_pauli("X^2 X^2", 4), parse_pauli("Z^2 Z^2", 4)])])
def test_membership_against_enumeration(S):
    members = all_elements(S)
    d, n = S.d, S.n
    for xs in itertools.product(range(d), repeat=n):
        for zs in itertools.product(range(d), repeat=n):
            for c in range(2 * d):
                g = PauliOperator(d, c, xs, zs)
                exps = is_member(g, S)
                assert (exps is not None) == (g in members)
                if exps is not None:
                    prod = PauliOperator.identity(d, n)
                    for gen, e in zip(S.generators, exps):
                        prod = multiply(prod, power(gen, e))
                    assert prod == g


def test_membership_of_example3_products():
    S = ex3_group()
    T = ex3_transformed_group()
    for g in T.generators:
        assert g in S
    assert T.order() == S.order()
    # the phase matters: -g1 is not in S
    g1 = S.generators[0]
    assert g1.with_phase(g1.phase + 2) not in S


def test_example3b_file_has_the_transformed_generators():
    prob = load_demo("example3b")
    assert tuple(prob.generators) == ex3_transformed_group().generators


# -- restricted groups and patterns ------------------------------------------------------


def test_restriction_is_invariant_under_generator_recombination(rng):
    S = ex3_group()
    gens = list(S.generators)
    for _ in range(30):
        i, j = rng.choice(len(gens), size=2, replace=False)
        gens[i] = multiply(gens[i], gens[j])
    S2 = build_group(gens)
    for T in ([6, 7, 8], [2, 4, 5, 7], [1, 2], [3]):
        assert restrict_group(S, T).same_as(restrict_group(S2, T))


def test_bell_restriction_is_full_pauli_group():
    R = restrict_group(bell_group(5), [2])
    w = certify_pattern(R, CanonicalPattern(1))
    assert w is not None
    assert certify_pattern(R, CanonicalPattern(0, (1,))) is None


def test_example2_receiver_pattern():
    R = restrict_group(ex2_group(), [3, 4, 5])
    assert certify_pattern(R, CanonicalPattern(2, (1,))) is not None
    assert certify_pattern(R, CanonicalPattern(3)) is None
    assert certify_pattern(R, CanonicalPattern(2)) is None


def test_witness_checking_rejects_wrong_slots():
    R = restrict_group(bell_group(3), [2])
    Z, X = parse_pauli("Z", 3), parse_pauli("X", 3)
    assert certify_pattern(R, CanonicalPattern(1), PatternWitness((Z,), (X,)))
    assert not certify_pattern(R, CanonicalPattern(1), PatternWitness((X,), (Z,)))  # comm(X, Z) = -1
    assert not certify_pattern(R, CanonicalPattern(1), PatternWitness((Z,), (power(X, 2),)))


def test_composite_tail_pattern_with_nonunit_exponents():
    S = build_group([parse_pauli("X^2 X^2", 4), parse_pauli("Z^2 Z^2", 4)])
    R = restrict_group(S, [2])
    pattern = CanonicalPattern(0, (2, 2))
    assert certify_pattern(R, pattern) is not None
    w = PatternWitness((parse_pauli("Z^2", 4), parse_pauli("X^2", 4)), ())
    assert certify_pattern(R, pattern, w) is not None


# -- partitions and decompositions --------------------------------------------------------


def test_normalize_partition_puts_receiver_last():
    assert normalize_partition(3, [[3], [1, 2]], receiver=1) == ((1, 2), (3,))
    with pytest.raises(PartitionError):
        normalize_partition(3, [[1], [2]])
    with pytest.raises(PartitionError):
        normalize_partition(3, [[1, 2], [2, 3]])
    with pytest.raises(PartitionError):
        normalize_partition(2, [[1, 2]])


@pytest.mark.parametrize("d", [2, 3, 5, 7])
def test_bell_decomposition(d):
    dec = find_bipartite_decomposition(bell_group(d), [2])
    assert dec.capacities == (1,)
    assert not dec.best_effort
    assert verify_decomposition(bell_group(d), dec) is None


def test_example2_decomposition():
    S = ex2_group()
    dec = find_bipartite_decomposition(S, [3, 4, 5])
    assert dec.capacities == (2,)
    assert dec.pattern == CanonicalPattern(0, (1,))
    assert dec.receiver_pattern == CanonicalPattern(2, (1,))
    assert certify_pattern(restrict_group(S, [3, 4, 5]), dec.receiver_pattern) is not None


def test_example3_partition1():
    S = ex3_group()
    out = search_decomposition(S, EX3_PARTITION_1)
    assert out.decomposition is not None, out.message
    assert out.decomposition.capacities == (1, 2)
    assert verify_decomposition(S, out.decomposition) is None


def test_example3_partition2_certified_and_capped():
    S = ex3_transformed_group()
    out = certify_decomposition(S, EX3_PARTITION_2, [[1, 2], [3, 4], [5, 6, 7]])
    dec = out.decomposition
    assert dec is not None, out.message
    assert dec.capacities == (1, 1)
    # tail <i, Z1, X1, Z2>: one tail pair plus an isotropic Z
    assert dec.pattern == CanonicalPattern(0, (1, 1), (1,))
    assert dec.receiver_pattern == CanonicalPattern(2, (1, 1), (1,))
    assert verify_decomposition(S, dec) is None
    capped = search_decomposition(ex3_group(), EX3_PARTITION_2, max_capacities=[1, 1]).decomposition
    assert capped is not None and capped.capacities == (1, 1)


def test_certify_rejects_nonlocal_groups():
    S = ex3_transformed_group()
    out = certify_decomposition(S, EX3_PARTITION_2, [[1, 3], [2, 4], [5, 6, 7]])
    assert out.decomposition is None
    assert out.stage == "locality"


def test_decomposition_exists_only_when_receiver_gets_pairs():
    S = build_group([parse_pauli("Z I", 2), parse_pauli("I Z", 2)])
    out = search_decomposition(S, [[1], [2]])
    assert out.decomposition is None or out.decomposition.capacities == (0,)


def test_composite_d_is_best_effort():
    dec = find_bipartite_decomposition(bell_group(6), [2])
    assert dec is not None and dec.best_effort
    assert dec.capacities == (1,)
